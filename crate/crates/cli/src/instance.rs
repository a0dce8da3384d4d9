//! Instance files for `refine`:
//!
//! ```text
//! chart base
//! 0.1 0.2          # a point of K
//! 0.0 0.0 1.0      # a disc of the current covering
//! ---              # next covering
//! 0.1 0.2 0.3
//! ```
//!
//! `#` starts a comment. The first non-empty line names the chart. A
//! `M <n>` line sets the disc budget; otherwise it is the largest covering.

use crate::CliError;
use linfol::covering::Disc;
use linfol::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub chart: String,
    pub points: Vec<Complex64>,
    pub coverings: Vec<Vec<Disc>>,
    pub m: usize,
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut chart = None;
        let mut points = Vec::new();
        let mut coverings: Vec<Vec<Disc>> = vec![vec![]];
        let mut m = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Instance { line: i + 1, message: msg };
            let words: Vec<&str> = line.split_whitespace().collect();
            if chart.is_none() {
                match words.as_slice() {
                    ["chart", name] => {
                        chart = Some(name.to_string());
                        continue;
                    }
                    _ => return Err(bad("first line must be `chart <name>`".into())),
                }
            }
            match words.as_slice() {
                ["---"] => coverings.push(vec![]),
                ["M", n] => m = Some(n.parse().map_err(|_| bad(format!("bad budget {n:?}")))?),
                _ => {
                    let nums = words
                        .iter()
                        .map(|w| w.parse::<f64>().ok().filter(|v| v.is_finite()))
                        .collect::<Option<Vec<f64>>>()
                        .ok_or_else(|| bad(format!("not numeric: {line:?}")))?;
                    match nums.as_slice() {
                        [x, y] => points.push(Complex64::new(*x, *y)),
                        [x, y, r] => coverings
                            .last_mut()
                            .expect("never empty")
                            .push(Disc::new(Complex64::new(*x, *y), *r).map_err(|e| bad(e.to_string()))?),
                        _ => return Err(bad(format!("expected 2 or 3 numbers, got {}", nums.len()))),
                    }
                }
            }
        }
        let chart = chart.ok_or(CliError::Instance { line: 0, message: "empty instance".into() })?;
        coverings.retain(|c| !c.is_empty());
        let m = m.unwrap_or_else(|| coverings.iter().map(Vec::len).max().unwrap_or(0));
        Ok(Self { chart, points, coverings, m })
    }
}
