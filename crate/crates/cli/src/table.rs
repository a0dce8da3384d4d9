//! Tab-separated tables rendered from one or more reports.

use crate::report::Report;
use crate::CliError;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const SELECTORS: [&str; 3] = ["entropy", "margins", "constants"];

pub fn table(reports: &[Report], selector: &str) -> Result<String, CliError> {
    match selector {
        "entropy" => Ok(entropy(reports)),
        "margins" => Ok(margins(reports)),
        "constants" => Ok(constants(reports)),
        other => Err(CliError::UnknownSelector(other.to_string())),
    }
}

fn num(v: Option<&serde_json::Value>) -> String {
    v.and_then(|v| v.as_f64()).map(|x| format!("{x}")).unwrap_or_else(|| "NA".into())
}

fn entropy(reports: &[Report]) -> String {
    let mut s = String::from("R\tepsilon\tN\tlogN_over_R\n");
    for r in reports.iter().flat_map(|r| &r.records).filter(|r| r.op == "entropy" && r.data.contains_key("N")) {
        let _ = writeln!(s, "{}\t{}\t{}\t{}", num(r.data.get("R")), num(r.data.get("epsilon")), num(r.data.get("N")), num(r.data.get("rate")));
    }
    s
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn margins(reports: &[Report]) -> String {
    let mut by: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in reports.iter().flat_map(|r| &r.records) {
        if let Some(m) = r.margin.filter(|m| !m.is_nan()) {
            by.entry(&r.op).or_default().push(m);
        }
    }
    let mut s = String::from("op\tcount\tmin\tmedian\tmax\n");
    for (op, mut v) in by {
        v.sort_by(f64::total_cmp);
        let _ = writeln!(s, "{op}\t{}\t{}\t{}\t{}", v.len(), v[0], median(&v), v[v.len() - 1]);
    }
    s
}

/// One column per report (in the given order), then the relative spread
/// `(max − min)/|mean|` of the per-report maxima.
fn constants(reports: &[Report]) -> String {
    let mut by: BTreeMap<&str, Vec<Option<f64>>> = BTreeMap::new();
    for (i, rep) in reports.iter().enumerate() {
        for r in &rep.records {
            if let (Some(c), Some(v)) = (&r.constant, r.value) {
                let col = by.entry(c).or_insert_with(|| vec![None; reports.len()]);
                col[i] = Some(col[i].map_or(v, |w: f64| w.max(v)));
            }
        }
    }
    let mut s = String::from("constant");
    for r in reports {
        let _ = write!(s, "\tseed_{}", r.meta.seed);
    }
    s.push_str("\tspread\n");
    for (c, vals) in by {
        let _ = write!(s, "{c}");
        for v in &vals {
            let _ = write!(s, "\t{}", v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into()));
        }
        let got: Vec<f64> = vals.iter().flatten().copied().collect();
        let spread = if got.len() < 2 {
            "NA".to_string()
        } else {
            let (lo, hi) = got.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let mean = got.iter().sum::<f64>() / got.len() as f64;
            ((hi - lo) / mean.abs()).to_string()
        };
        let _ = writeln!(s, "\t{spread}");
    }
    s
}
