//! Experiment configuration: TOML with complex numbers written as `"re,im"`
//! and log-space quantities under keys ending in `_log`.

use crate::CliError;
use linfol::linear_model::{ConstantInputs, LinearVectorField, ModelPoint, PaperConstants};
use linfol::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// Parses `"re,im"`; a bare number is read as real.
pub fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::ConfigInvalid(format!("expected \"re,im\", got {s:?}"));
    let mut it = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad()));
    let re = it.next().ok_or_else(bad)??;
    let im = it.next().transpose()?.unwrap_or(0.0);
    if it.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub lambdas: Vec<String>,
    pub normalize: bool,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self { lambdas: vec!["1,0".into(), "1,0".into()], normalize: true }
    }
}

/// Base point: ambient coordinates, or `(log|x_j|, arg x_j)` pairs. An empty
/// `x_log` entry stands for a zero coordinate.
/// Missing fields are absent, not defaulted, so `x_log` alone is accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    #[serde(default)]
    pub x: Option<Vec<String>>,
    #[serde(default)]
    pub x_log: Option<Vec<String>>,
}

impl Default for PointSpec {
    fn default() -> Self {
        Self { x: Some(vec!["0.225,0".into(), "0,0.225".into()]), x_log: None }
    }
}

/// Overrides of the constant inputs; `lambda` defaults to `λ*` of the field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSpec {
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    pub exponent_scale: Option<f64>,
    pub rho: Option<f64>,
    pub c1: Option<f64>,
    pub m0: Option<u32>,
    pub m1: Option<u32>,
    pub hbar: Option<f64>,
    pub t: Option<f64>,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub r_min_log: f64,
    pub growth_log: f64,
    pub n_rays: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub ops: Vec<String>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self { ops: vec![], samples: 1000, seed: 0 }
    }
}

/// `K` is the `n^k` real grid in `half_width·𝔻^k`; an empty `epsilon` list means `ε = e^{−R}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropySpec {
    pub half_width: f64,
    pub n: usize,
    pub r_list: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub rate_bound: f64,
}

impl Default for EntropySpec {
    fn default() -> Self {
        Self { half_width: 0.5, n: 20, r_list: vec![1.0, 2.0, 3.0, 4.0], epsilon: vec![], rate_bound: 140.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverSpec {
    pub m1: u32,
    pub hbar: f64,
    pub m_list: Vec<u32>,
    pub sectors: usize,
    pub samples: usize,
}

impl Default for CoverSpec {
    fn default() -> Self {
        Self { m1: 5, hbar: 0.01, m_list: (10..=20).collect(), sectors: 12, samples: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaSpec {
    pub m0: u32,
    pub m1: u32,
    pub hbar: f64,
    pub t: f64,
    pub p: usize,
    pub per_arc: usize,
}

impl Default for GammaSpec {
    fn default() -> Self {
        Self { m0: 5, m1: 10, hbar: 0.01, t: 0.075, p: 10_000, per_arc: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeSpec {
    pub m1: u32,
    pub hbar: f64,
    pub t: f64,
    pub depth: usize,
    pub branching: usize,
    pub cover_m: u32,
    pub samples: usize,
}

impl Default for TreeSpec {
    fn default() -> Self {
        Self { m1: 10, hbar: 0.01, t: 0.075, depth: 3, branching: 4, cover_m: 20, samples: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSpec {
    pub pairs: usize,
    pub distance: f64,
    pub target: f64,
}

impl Default for ChainSpec {
    fn default() -> Self {
        Self { pairs: 20, distance: 1e-9, target: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub point: PointSpec,
    pub constants: ConstantsSpec,
    pub lattice: Option<LatticeSpec>,
    pub run: RunSpec,
    pub entropy: EntropySpec,
    pub cover: CoverSpec,
    pub gamma: GammaSpec,
    pub tree: TreeSpec,
    pub chain: ChainSpec,
    pub output: OutputSpec,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<String>,
    /// Both scales multiply the `λR` product inside exponents only.
    pub scale_r: Option<f64>,
    pub scale_lambda: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigInvalid(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(n) = o.samples {
            self.run.samples = n;
        }
        if let Some(d) = &o.out {
            self.output.dir = Some(d.clone());
        }
        for s in [o.scale_r, o.scale_lambda].into_iter().flatten() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::ConfigInvalid(format!("scale factor {s} must be positive")));
            }
            let cur = self.constants.exponent_scale.unwrap_or(1.0);
            self.constants.exponent_scale = Some(cur * s);
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSpec::default();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn field(&self) -> Result<LinearVectorField, CliError> {
        let l = self.field.lambdas.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
        let f = LinearVectorField::new(l).map_err(|e| CliError::ConfigInvalid(format!("field: {e}")))?;
        Ok(if self.field.normalize { f.normalize() } else { f })
    }

    pub fn point(&self, k: usize) -> Result<ModelPoint, CliError> {
        let bad = |e: String| CliError::ConfigInvalid(format!("point: {e}"));
        let p = match (&self.point.x, &self.point.x_log) {
            (Some(x), None) => {
                let z = x.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
                ModelPoint::from_complex(&z)
            }
            (None, Some(x)) => {
                let parts = x
                    .iter()
                    .map(|s| if s.trim().is_empty() { Ok(None) } else { parse_complex(s).map(|c| Some((c.re, c.im))) })
                    .collect::<Result<Vec<_>, _>>()?;
                ModelPoint::from_log_polar(&parts)
            }
            _ => return Err(bad("give exactly one of x and x_log".into())),
        }
        .map_err(|e| bad(e.to_string()))?;
        if p.k() != k {
            return Err(bad(format!("{} coordinates for a field of dimension {k}", p.k())));
        }
        Ok(p)
    }

    pub fn constants(&self, field: &LinearVectorField) -> Result<PaperConstants, CliError> {
        let d = ConstantInputs::default();
        let c = &self.constants;
        let inputs = ConstantInputs {
            lambda: c.lambda.unwrap_or(field.lambda_star()),
            r: c.r.unwrap_or(d.r),
            exponent_scale: c.exponent_scale.unwrap_or(d.exponent_scale),
            rho: c.rho.unwrap_or(d.rho),
            c1: c.c1.unwrap_or(d.c1),
            m0: c.m0.unwrap_or(d.m0),
            m1: c.m1.unwrap_or(d.m1),
            hbar: c.hbar.unwrap_or(d.hbar),
            t: c.t.unwrap_or(d.t),
            eps0: c.eps0.unwrap_or(d.eps0),
            eps1: c.eps1.unwrap_or(d.eps1),
            kappa: c.kappa.unwrap_or(d.kappa),
        };
        PaperConstants::new(inputs, field.lambda_star()).map_err(|e| CliError::ConfigInvalid(e.to_string()))
    }
}
