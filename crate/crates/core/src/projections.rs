//! Maps between nearby leaves: the linear transport `Ψ_{x,y}`, orthogonal
//! projection onto a leaf, their smooth blend `Ψ̃_{x,y}`, finite-difference
//! Beltrami coefficients and the projection chain along a geodesic.

use crate::bowen::LeafSampler;
use crate::cmath::{cexpm1, log_sum_exp};
use crate::hyperbolic::{disc_distance, disc_radius, CoveringMap2D, HyperbolicError};
use crate::linear_model::{leaf_eval, AmbientPoint, Coord, LeafChart, LinearVectorField, ModelError};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
    #[error("coordinate {0} is zero")]
    ZeroCoordinate(usize),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("projection moved {moved} > plaque radius {radius}")]
    LeftPlaque { moved: f64, radius: f64 },
    #[error("probe {index}: {source}")]
    AtProbe { index: usize, source: Box<ProjectionError> },
    #[error("|z'_{0}/w_{0} - 1| >= 1/2")]
    BranchAmbiguity(usize),
    #[error("|∂τ| = {derivative} below 10x the error estimate {error}")]
    DegenerateDerivative { derivative: f64, error: f64 },
    #[error("chain broken at step {0}")]
    ChainBroken(usize),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
}

/// `Ψ_{x,y}(z) = (y_j/x_j · z_j)_j`, exact in log-polar arithmetic.
pub fn linear_leaf_map(x: &AmbientPoint, y: &AmbientPoint, z: &AmbientPoint) -> Result<AmbientPoint, ProjectionError> {
    let coords = (0..z.k())
        .map(|j| {
            let d = y.coord(j).log_ratio(&x.coord(j)).ok_or(ProjectionError::ZeroCoordinate(j))?;
            Ok(z.coord(j).mul_exp(d))
        })
        .collect::<Result<Vec<_>, ProjectionError>>()?;
    Ok(AmbientPoint::new(coords))
}

/// Largest `|log(a_j / b_j)|` over coordinates (branch nearest 0); infinite
/// when exactly one side is zero.
pub fn log_space_residual(a: &AmbientPoint, b: &AmbientPoint) -> f64 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(p, q)| match (p.is_zero(), q.is_zero()) {
            (true, true) => 0.0,
            (false, false) => p.log_ratio(q).map_or(f64::INFINITY, |d| d.norm()),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionConfig {
    pub max_iterations: usize,
    /// Stationarity threshold relative to `‖J‖·‖z‖`.
    pub gradient_tol: f64,
    /// Plaque radius as a fraction of the seed's distance to `∂Π_y`.
    pub plaque_fraction: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { max_iterations: 50, gradient_tol: 1e-12, plaque_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub zeta: Complex64,
    pub point: AmbientPoint,
    pub iterations: usize,
    /// `|J^H r| / (‖J‖·‖z‖)` at the returned point.
    pub gradient: f64,
}

fn scaled(c: Coord, s: f64) -> Complex64 {
    match c {
        Coord::Zero => Complex64::new(0.0, 0.0),
        Coord::Polar { log_modulus, argument } => Complex64::from_polar((log_modulus - s).exp(), argument),
    }
}

/// Residual `φ_y(ζ) − z` and Jacobian `(λ_j φ_y(ζ)_j)`, both divided by `e^s`.
fn residual(field: &LinearVectorField, y: &AmbientPoint, z: &AmbientPoint, zeta: Complex64, s: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let phi = leaf_eval(field, y, zeta);
    let mut r = Vec::with_capacity(z.k());
    let mut jac = Vec::with_capacity(z.k());
    for j in 0..z.k() {
        let (p, q) = (phi.coord(j), z.coord(j));
        r.push(match p.log_ratio(&q) {
            Some(d) => scaled(q, s) * cexpm1(d),
            None => scaled(p, s) - scaled(q, s),
        });
        jac.push(field.lambda(j) * scaled(p, s));
    }
    (r, jac)
}

/// Gauss–Newton minimization of `ζ ↦ ‖φ_y(ζ) − z‖₂²` from `ζ₀`.
pub fn orthogonal_project(
    field: &LinearVectorField,
    z: &AmbientPoint,
    y: &AmbientPoint,
    zeta0: Complex64,
    cfg: &ProjectionConfig,
) -> Result<Projection, ProjectionError> {
    let chart = LeafChart::new(field, y)?;
    let radius = cfg.plaque_fraction * chart.signed_boundary_distance(zeta0).max(0.0);
    let s = if z.is_zero() { leaf_eval(field, y, zeta0).coords().iter().map(|c| c.log_modulus()).fold(f64::NEG_INFINITY, f64::max) } else {
        z.coords().iter().map(|c| c.log_modulus()).fold(f64::NEG_INFINITY, f64::max)
    };
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut zeta = zeta0;
    for it in 0..=cfg.max_iterations {
        let (r, jac) = residual(field, y, z, zeta, s);
        let jn = norm(&jac);
        let g: Complex64 = jac.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
        let zn = norm(&z.coords().iter().map(|c| scaled(*c, s)).collect::<Vec<_>>()).max(norm(&r));
        let grad = if jn * zn > 0.0 { g.norm() / (jn * zn) } else { 0.0 };
        let moved = (zeta - zeta0).norm();
        if moved > radius {
            return Err(ProjectionError::LeftPlaque { moved, radius });
        }
        if grad <= cfg.gradient_tol {
            return Ok(Projection { zeta, point: leaf_eval(field, y, zeta), iterations: it, gradient: grad });
        }
        if it == cfg.max_iterations || jn == 0.0 {
            break;
        }
        zeta -= g / (jn * jn);
    }
    Err(ProjectionError::NoConvergence(cfg.max_iterations))
}

/// `ζ` with `φ_y(ζ) = Ψ_{x,y}(φ_x(ζ))`: the transport keeps chart coordinates.
fn seed(zeta_x: Complex64) -> Complex64 {
    zeta_x
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafMapReport {
    /// `sup ‖Φ(z) − z‖` over probes.
    pub c0_deviation: f64,
    /// `sup (|D| + |D′| + |D″|)` of `D(ζ) = Φ(φ_x(ζ)) − φ_x(ζ)` by central differences.
    pub c2_deviation: Option<f64>,
    /// Every probe lies in the ¾-polydisc.
    pub holomorphic_region_flag: bool,
    pub probe_count: usize,
    /// `max_j max(|x_j/y_j − 1|, |y_j/x_j − 1|)`.
    pub ratio_deviation: f64,
    /// `c0_deviation ≤ 10 · ratio_deviation`.
    pub ratio_ok: bool,
    /// Disagreement between projections of the same probe from two seeds.
    pub overlap_disagreement: f64,
    pub flagged: usize,
}

/// Largest two-sided ratio deviation between the coordinates of `x` and `y`.
pub fn ratio_deviation(x: &AmbientPoint, y: &AmbientPoint) -> Result<f64, ProjectionError> {
    (0..x.k())
        .map(|j| {
            let d = x.coord(j).log_ratio(&y.coord(j)).ok_or(ProjectionError::ZeroCoordinate(j))?;
            Ok(cexpm1(d).norm().max(cexpm1(-d).norm()))
        })
        .try_fold(0.0f64, |m, v: Result<f64, ProjectionError>| Ok(m.max(v?)))
}

fn diff_norm(a: &AmbientPoint, b: &AmbientPoint) -> Vec<Complex64> {
    a.to_complex().iter().zip(b.to_complex()).map(|(u, v)| u - v).collect()
}

/// Projects `φ_x(ζ_i)` onto `L_y` for every probe `ζ_i ∈ Π_x`, each seeded by
/// the `Ψ` correspondence.
pub fn global_projection(
    field: &LinearVectorField,
    x: &AmbientPoint,
    y: &AmbientPoint,
    probes: &[Complex64],
    cfg: &ProjectionConfig,
) -> Result<LeafMapReport, ProjectionError> {
    let dev = ratio_deviation(x, y)?;
    struct Probe {
        c0: f64,
        c2: f64,
        overlap: f64,
        in_region: bool,
    }
    let project = |zeta: Complex64| -> Result<Vec<Complex64>, ProjectionError> {
        let z = leaf_eval(field, x, zeta);
        let p = orthogonal_project(field, &z, y, seed(zeta), cfg)?;
        Ok(diff_norm(&p.point, &z))
    };
    let results: Vec<Result<Probe, ProjectionError>> = probes
        .par_iter()
        .enumerate()
        .map(|(index, &zeta)| {
            let wrap = |e| ProjectionError::AtProbe { index, source: Box::new(e) };
            let z = leaf_eval(field, x, zeta);
            let d0 = project(zeta).map_err(wrap)?;
            let nrm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let c0 = nrm(&d0);
            let alt = orthogonal_project(field, &z, y, seed(zeta) + 1e-3 * (1.0 + zeta.norm()), cfg).map_err(wrap)?;
            let first = orthogonal_project(field, &z, y, seed(zeta), cfg).map_err(wrap)?;
            let overlap = alt.point.distance(&first.point);
            let h = 1e-3;
            let mut c2 = c0;
            let (dp, dm) = (project(zeta + h).map_err(wrap)?, project(zeta - h).map_err(wrap)?);
            let d1: Vec<Complex64> = dp.iter().zip(&dm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let d2: Vec<Complex64> = dp.iter().zip(&dm).zip(&d0).map(|((a, b), c)| (a + b - 2.0 * c) / (h * h)).collect();
            c2 += nrm(&d1) + nrm(&d2);
            let in_region = z.coords().iter().all(|c| c.log_modulus() <= 0.75f64.ln());
            Ok(Probe { c0, c2, overlap, in_region })
        })
        .collect();
    let mut report = LeafMapReport {
        c0_deviation: 0.0,
        c2_deviation: if probes.len() >= 3 { Some(0.0) } else { None },
        holomorphic_region_flag: true,
        probe_count: probes.len(),
        ratio_deviation: dev,
        ratio_ok: true,
        overlap_disagreement: 0.0,
        flagged: 0,
    };
    for r in results {
        let p = r?;
        report.c0_deviation = report.c0_deviation.max(p.c0);
        if let Some(c) = report.c2_deviation.as_mut() {
            *c = c.max(p.c2);
        }
        report.overlap_disagreement = report.overlap_disagreement.max(p.overlap);
        report.holomorphic_region_flag &= p.in_region;
        if p.overlap > 1e-10 {
            report.flagged += 1;
        }
    }
    report.ratio_ok = report.c0_deviation <= 10.0 * dev;
    Ok(report)
}

/// Smooth cutoff `χ` on a smoothed max-norm `s(z) = β⁻¹ log Σ|z_j|^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendCutoff {
    inner_log: f64,
    outer_log: f64,
    sharpness: f64,
}

impl BlendCutoff {
    pub fn new(inner_log: f64, outer_log: f64) -> Result<Self, ProjectionError> {
        if !(inner_log < outer_log) {
            return Err(ProjectionError::InvalidCutoff(format!("{inner_log} >= {outer_log}")));
        }
        Ok(Self { inner_log, outer_log, sharpness: 64.0 / (outer_log - inner_log) })
    }

    /// `χ = 0` on `¼𝔻^k`, `χ = 1` off `½𝔻^k`.
    pub fn quarter_half() -> Self {
        Self::new(0.25f64.ln(), 0.5f64.ln()).expect("valid")
    }

    pub fn inner_log(&self) -> f64 {
        self.inner_log
    }

    pub fn outer_log(&self) -> f64 {
        self.outer_log
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn smoothed_norm_log(&self, z: &AmbientPoint) -> f64 {
        log_sum_exp(z.coords().iter().map(|c| self.sharpness * c.log_modulus())) / self.sharpness
    }

    /// The lower edge sits `log(k)/β` above `inner_log`, which is the most the
    /// smoothed norm exceeds the max-norm, so `χ` vanishes on the inner polydisc.
    pub fn chi(&self, z: &AmbientPoint) -> f64 {
        let lo = self.inner_log + (z.k() as f64).ln() / self.sharpness;
        let t = ((self.smoothed_norm_log(z) - lo) / (self.outer_log - lo)).clamp(0.0, 1.0);
        t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blend {
    pub point: AmbientPoint,
    pub chi: f64,
    /// `Ψ(z)`.
    pub linear: AmbientPoint,
    /// `Φ(z)` when it was needed.
    pub projected: Option<AmbientPoint>,
}

/// `Ψ̃_{x,y}(φ_x(ζ))`: `w_i e^{χ(z) log(z′_i/w_i)}` with `w = Ψ(z)` and `z′ = Φ(z)`.
pub fn blended_map(
    field: &LinearVectorField,
    x: &AmbientPoint,
    y: &AmbientPoint,
    cutoff: &BlendCutoff,
    zeta: Complex64,
    cfg: &ProjectionConfig,
) -> Result<Blend, ProjectionError> {
    let z = leaf_eval(field, x, zeta);
    let w = linear_leaf_map(x, y, &z)?;
    let chi = cutoff.chi(&z);
    if chi == 0.0 {
        return Ok(Blend { point: w.clone(), chi, linear: w, projected: None });
    }
    let zp = orthogonal_project(field, &z, y, seed(zeta), cfg)?.point;
    if chi == 1.0 {
        return Ok(Blend { point: zp.clone(), chi, linear: w, projected: Some(zp) });
    }
    let coords = (0..z.k())
        .map(|i| {
            let (a, b) = (zp.coord(i), w.coord(i));
            match a.log_ratio(&b) {
                Some(d) if cexpm1(d).norm() < 0.5 => Ok(b.mul_exp(chi * d)),
                _ if a.is_zero() && b.is_zero() => Ok(Coord::Zero),
                _ => Err(ProjectionError::BranchAmbiguity(i)),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Blend { point: AmbientPoint::new(coords), chi, linear: w, projected: Some(zp) })
}

/// `max_{i,j} |λ_j log(w′_i/w_i) − λ_i log(w′_j/w_j)|`: zero iff `w′` lies on the leaf of `w`.
pub fn leaf_criterion_residual(field: &LinearVectorField, w: &AmbientPoint, wp: &AmbientPoint) -> f64 {
    let logs: Vec<Option<Complex64>> = (0..w.k()).map(|i| wp.coord(i).log_ratio(&w.coord(i))).collect();
    let mut worst: f64 = 0.0;
    for i in 0..w.k() {
        for j in i + 1..w.k() {
            if let (Some(a), Some(b)) = (logs[i], logs[j]) {
                worst = worst.max((field.lambda(j) * a - field.lambda(i) * b).norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeltramiEstimate {
    pub mu: Complex64,
    /// Error bound on `μ` from the Richardson difference.
    pub error: f64,
    pub dz_abs: f64,
}

/// `μ = ∂̄τ/∂τ` from central differences at `h` and `h/2`, Richardson-extrapolated.
pub fn beltrami_estimate(tau: impl Fn(Complex64) -> Complex64, xi: Complex64, h: f64) -> Result<BeltramiEstimate, ProjectionError> {
    let i = Complex64::i();
    let partials = |h: f64| {
        let fx = (tau(xi + h) - tau(xi - h)) / (2.0 * h);
        let fy = (tau(xi + i * h) - tau(xi - i * h)) / (2.0 * h);
        ((fx - i * fy) / 2.0, (fx + i * fy) / 2.0)
    };
    let (d1, b1) = partials(h);
    let (d2, b2) = partials(0.5 * h);
    let d = (4.0 * d2 - d1) / 3.0;
    let b = (4.0 * b2 - b1) / 3.0;
    let (ed, eb) = ((d2 - d1).norm() / 3.0, (b2 - b1).norm() / 3.0);
    let scale = d.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    let floor = 64.0 * f64::EPSILON * scale;
    let err_d = ed + floor;
    if d.norm() <= 10.0 * err_d {
        return Err(ProjectionError::DegenerateDerivative { derivative: d.norm(), error: err_d });
    }
    let mu = b / d;
    let error = (eb + floor + mu.norm() * err_d) / (d.norm() - err_d);
    Ok(BeltramiEstimate { mu, error, dz_abs: d.norm() })
}

/// Disc correspondence induced by `Ψ_{x,y}`: `τ_y⁻¹ ∘ τ_x` (holomorphic).
pub fn psi_disc_correspondence(
    field: &LinearVectorField,
    x: &AmbientPoint,
    y: &AmbientPoint,
) -> Result<impl Fn(Complex64) -> Complex64, ProjectionError> {
    let mx = CoveringMap2D::new(&LeafChart::new(field, x)?)?;
    let my = CoveringMap2D::new(&LeafChart::new(field, y)?)?;
    Ok(move |xi| my.inverse(seed(mx.eval(xi))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub eps1: f64,
    /// Chains with `ε₁ ≥ eps0` are rejected.
    pub eps0: f64,
    pub projection: ProjectionConfig,
    pub max_steps: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { eps1: 0.01, eps0: 0.1, projection: ProjectionConfig::default(), max_steps: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub xi: Complex64,
    /// `dist(x^j, E)` with `E` the union of coordinate hyperplanes.
    pub dist_e: f64,
    /// `dist(y^j, x^j)`.
    pub deviation: f64,
    /// `deviation / dist_e^6`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    /// `max r_{j+1}/r_j` (1 when every ratio is 0).
    pub kappa_hat: f64,
    /// Same fit with exponent 2 in place of 6 (diagnostic).
    pub kappa_hat_exp2: f64,
    /// `ĉ` solving `n = log⋆dist(x,E) · R · e^{ĉR}`.
    pub step_exponent: f64,
    pub r: f64,
}

impl ChainReport {
    pub fn n(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn max_growth(&self) -> f64 {
        let r0 = self.steps[0].ratio;
        if r0 == 0.0 {
            return if self.steps.iter().all(|s| s.ratio == 0.0) { 1.0 } else { f64::INFINITY };
        }
        self.steps.iter().map(|s| s.ratio / r0).fold(0.0, f64::max)
    }
}

fn dist_e(p: &AmbientPoint) -> f64 {
    p.coords().iter().map(|c| c.log_modulus()).fold(f64::INFINITY, f64::min).exp()
}

fn fit(steps: &[ChainStep], expo: i32) -> f64 {
    let r: Vec<f64> = steps.iter().map(|s| s.deviation / s.dist_e.powi(expo)).collect();
    r.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 1.0 }).fold(1.0, f64::max)
}

/// Walks `[0, ξ]` in the disc of `x` with ambient steps `dist(x^j, E)·ε₁`,
/// projecting each `x^{j+1}` onto `L_y` from the previous `y^j`.
pub fn chain_project(
    field: &LinearVectorField,
    x: &AmbientPoint,
    y: &AmbientPoint,
    target: Complex64,
    cfg: &ChainConfig,
) -> Result<ChainReport, ProjectionError> {
    if !(cfg.eps1 > 0.0 && cfg.eps1 < cfg.eps0) {
        return Err(ProjectionError::ChainBroken(0));
    }
    let leaf = LeafSampler::new(field, x).map_err(|_| ProjectionError::ChainBroken(0))?;
    let map = *leaf.covering();
    let broken = |j: usize| move |_| ProjectionError::ChainBroken(j);
    let y0 = orthogonal_project(field, y, y, Complex64::new(0.0, 0.0), &cfg.projection).map_err(broken(0))?;
    let mut zeta_y = y0.zeta;
    let mut t = 0.0f64;
    let mut xj = leaf.eval(Complex64::new(0.0, 0.0));
    let mut zeta_x = map.eval(Complex64::new(0.0, 0.0));
    let mut steps = vec![ChainStep { xi: Complex64::new(0.0, 0.0), dist_e: dist_e(&xj), deviation: xj.distance(y), ratio: xj.distance(y) / dist_e(&xj).powi(6) }];
    while t < 1.0 {
        let j = steps.len();
        if j > cfg.max_steps {
            return Err(ProjectionError::ChainBroken(j));
        }
        let want = dist_e(&xj) * cfg.eps1;
        let at = |s: f64| leaf.eval(target * s);
        let next_t = if at(1.0).distance(&xj) <= want {
            1.0
        } else {
            let (mut lo, mut hi) = (t, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if at(mid).distance(&xj) <= want {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if lo <= t {
                return Err(ProjectionError::ChainBroken(j));
            }
            lo
        };
        let xi = target * next_t;
        let xn = leaf.eval(xi);
        let zeta_xn = map.eval(xi);
        let p = orthogonal_project(field, &xn, y, zeta_y + (zeta_xn - zeta_x), &cfg.projection).map_err(broken(j))?;
        let de = dist_e(&xn);
        let dev = p.point.distance(&xn);
        steps.push(ChainStep { xi, dist_e: de, deviation: dev, ratio: dev / de.powi(6) });
        zeta_y = p.zeta;
        zeta_x = zeta_xn;
        xj = xn;
        t = next_t;
    }
    let r = disc_distance(Complex64::new(0.0, 0.0), target);
    let n = (steps.len() - 1) as f64;
    let log_star = 1.0 + steps[0].dist_e.ln().abs();
    Ok(ChainReport {
        kappa_hat: fit(&steps, 6),
        kappa_hat_exp2: fit(&steps, 2),
        step_exponent: if r > 0.0 { (n / (log_star * r)).ln() / r } else { 0.0 },
        steps,
        r,
    })
}

/// Target on the circle of hyperbolic radius `r` in direction `angle`.
pub fn geodesic_target(r: f64, angle: f64) -> Complex64 {
    Complex64::from_polar(disc_radius(r), angle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: f64, b: f64) -> Complex64 {
        Complex64::new(a, b)
    }

    fn field() -> LinearVectorField {
        LinearVectorField::from_pairs(&[(1.0, 0.0), (2.0, 0.0)]).unwrap()
    }

    #[test]
    fn psi_identity_and_basepoint() {
        let x = AmbientPoint::from_complex(&[c(0.1, 0.2), c(-0.3, 0.05)]);
        let y = AmbientPoint::from_complex(&[c(0.11, 0.19), c(-0.29, 0.06)]);
        let z = AmbientPoint::from_complex(&[c(0.05, 0.0), c(0.0, 0.02)]);
        assert!(log_space_residual(&linear_leaf_map(&x, &x, &z).unwrap(), &z) < 1e-15);
        assert!(log_space_residual(&linear_leaf_map(&x, &y, &x).unwrap(), &y) < 1e-15);
        let zero = AmbientPoint::from_complex(&[c(0.0, 0.0), c(0.1, 0.0)]);
        assert_eq!(linear_leaf_map(&zero, &y, &z), Err(ProjectionError::ZeroCoordinate(0)));
    }

    #[test]
    fn project_point_on_leaf_is_fixed() {
        let f = field();
        let y = AmbientPoint::from_complex(&[c(0.1, 0.2), c(-0.3, 0.05)]);
        let z0 = c(-0.2, 0.4);
        let z = leaf_eval(&f, &y, z0);
        let p = orthogonal_project(&f, &z, &y, z0, &ProjectionConfig::default()).unwrap();
        assert!(p.iterations <= 1);
        assert!((p.zeta - z0).norm() < 1e-14);
    }

    #[test]
    fn far_point_leaves_plaque() {
        let f = field();
        let y = AmbientPoint::from_complex(&[c(0.1, 0.0), c(0.1, 0.0)]);
        let z = AmbientPoint::from_complex(&[c(0.95, 0.0), c(0.95, 0.0)]);
        let e = orthogonal_project(&f, &z, &y, c(0.0, 0.0), &ProjectionConfig::default()).unwrap_err();
        assert!(matches!(e, ProjectionError::LeftPlaque { .. } | ProjectionError::NoConvergence(_)), "{e:?}");
    }

    #[test]
    fn cutoff_edges() {
        let b = BlendCutoff::quarter_half();
        let inside = AmbientPoint::from_complex(&[c(0.25, 0.0), c(0.0, 0.25)]);
        let outside = AmbientPoint::from_complex(&[c(0.5, 0.0), c(0.01, 0.0)]);
        assert_eq!(b.chi(&inside), 0.0);
        assert_eq!(b.chi(&outside), 1.0);
        assert!(BlendCutoff::new(0.0, -1.0).is_err());
    }

    #[test]
    fn affine_beltrami() {
        let e = beltrami_estimate(|z| z + 0.01 * z.conj(), c(0.2, -0.1), 1e-3).unwrap();
        assert!((e.mu - c(0.01, 0.0)).norm() < 1e-6);
        assert!(matches!(
            beltrami_estimate(|z: Complex64| z.conj(), c(0.1, 0.1), 1e-3),
            Err(ProjectionError::DegenerateDerivative { .. })
        ));
    }

    #[test]
    fn chain_identity() {
        let f = field();
        let x = AmbientPoint::from_complex(&[c(0.1, 0.05), c(0.08, -0.02)]);
        let rep = chain_project(&f, &x, &x, geodesic_target(1.0, 0.7), &ChainConfig::default()).unwrap();
        assert!(rep.steps.iter().all(|s| s.deviation < 1e-15), "{:?}", rep.steps.iter().map(|s| s.deviation).fold(0.0, f64::max));
        let bad = ChainConfig { eps1: 0.2, ..ChainConfig::default() };
        assert_eq!(chain_project(&f, &x, &x, geodesic_target(1.0, 0.7), &bad), Err(ProjectionError::ChainBroken(0)));
    }
}
