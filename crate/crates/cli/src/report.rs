//! Machine reports are JSON lines: one metadata line, then one line per
//! assertion. Nothing time-dependent goes in, so equal inputs give equal bytes.

use crate::CliError;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt::Write as _;

pub const PLUMBING: &str = "plumbing";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub ops: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub op: String,
    /// Lemma anchor such as `lemma:3R`, or [`PLUMBING`].
    pub anchor: String,
    pub assertion: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Signed distance to failure; negative when violated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// Name of a fitted constant carried in `value`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub data: Map<String, Value>,
}

impl Record {
    pub fn new(op: &str, assertion: impl Into<String>, pass: bool) -> Self {
        Self {
            op: op.to_string(),
            anchor: format!("lemma:{op}"),
            assertion: assertion.into(),
            pass,
            value: None,
            bound: None,
            margin: None,
            constant: None,
            data: Map::new(),
        }
    }

    /// `value ≤ bound`, with margin `bound − value`.
    pub fn at_most(op: &str, assertion: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { value: Some(value), bound: Some(bound), margin: Some(bound - value), ..Self::new(op, assertion, value <= bound) }
    }

    /// `value ≥ bound`, with margin `value − bound`.
    pub fn at_least(op: &str, assertion: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { value: Some(value), bound: Some(bound), margin: Some(value - bound), ..Self::new(op, assertion, value >= bound) }
    }

    pub fn fit(op: &str, constant: &str, value: f64) -> Self {
        Self { value: Some(value), constant: Some(constant.to_string()), ..Self::new(op, format!("fitted {constant}"), value.is_finite()) }
    }

    pub fn error(op: &str, message: impl std::fmt::Display) -> Self {
        Self::new(op, "op completed", false).with("error", message.to_string())
    }

    pub fn plumbing(mut self) -> Self {
        self.anchor = PLUMBING.to_string();
        self
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.data.insert(key.to_string(), v.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Meta(Meta),
    Assertion(Record),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub meta: Meta,
    pub records: Vec<Record>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&Line::Meta(self.meta.clone())).expect("meta serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(&Line::Assertion(r.clone())).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, CliError> {
        let mut meta = None;
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: Line = serde_json::from_str(line).map_err(|e| CliError::Report { line: i + 1, message: e.to_string() })?;
            match parsed {
                Line::Meta(m) if meta.is_none() => meta = Some(m),
                Line::Meta(_) => return Err(CliError::Report { line: i + 1, message: "second metadata line".into() }),
                Line::Assertion(r) => records.push(r),
            }
        }
        let meta = meta.ok_or(CliError::Report { line: 0, message: "no metadata line".into() })?;
        Ok(Self { meta, records })
    }

    /// Per-op pass counts and the failing assertions.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "config {} seed {}", self.meta.config_hash, self.meta.seed);
        let mut ops: Vec<&str> = Vec::new();
        for r in &self.records {
            if !ops.contains(&r.op.as_str()) {
                ops.push(&r.op);
            }
        }
        for op in ops {
            let rs: Vec<&Record> = self.records.iter().filter(|r| r.op == op).collect();
            let ok = rs.iter().filter(|r| r.pass).count();
            let _ = writeln!(s, "{op:<10} {}/{} {}", ok, rs.len(), if ok == rs.len() { "PASS" } else { "FAIL" });
            for r in rs.iter().filter(|r| !r.pass) {
                let detail = r.data.get("error").map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(s, "    FAIL {}: {} value={:?} bound={:?} {detail}", r.anchor, r.assertion, r.value, r.bound);
            }
        }
        let _ = writeln!(s, "{}", if self.passed() { "all assertions pass" } else { "violations found" });
        s
    }
}
