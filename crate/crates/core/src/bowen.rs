//! A Bowen-type distance between leaves of the local model, greedy separated
//! sets and desk-scale entropy counts, plus numerical checks of the closeness
//! and growth estimates for leaves near the singular point.
//!
//! The distance between `x` and `y` at scale `R` is approximated by
//! `min_θ sup_{ξ} ‖φ̂_x(ξ) − φ̂_y(e^{iθ}ξ)‖` over a fixed sample of the
//! hyperbolic disc `𝔻_R`, where `φ̂_x = φ_x ∘ τ_x`. Only rotations are used as
//! reparametrizations. The difference is holomorphic in `ξ`, so its sup over
//! the disc is reached on the boundary circle; the boundary sample spacing
//! gives the resolution that widens every estimate.

use crate::cmath::log_sum_exp;
use crate::hyperbolic::{
    disc_distance, disc_radius, eta_hat, hyperbolic_ball_sample, CoveringMap2D, HyperbolicError, MetricBound,
};
use crate::linear_model::{leaf_eval, AmbientPoint, Coord, LeafChart, LinearVectorField, ModelError, ModelPoint, PaperConstants, RegionOmega};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{LN_2, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BowenError {
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("coordinate {coordinate} fails clause {clause:?}")]
    ConditionUnmet { coordinate: usize, clause: Clause },
    #[error("path sample {0} leaves the half polydisc")]
    PathLeavesChart(usize),
    #[error("pair {0} has a coordinate below the hyperplane cutoff")]
    PairTooCloseToHyperplane(usize),
}

/// Which of the two per-coordinate closeness clauses applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    /// Both moduli below `α₂`.
    S1,
    /// Both ratios `|x_j/y_j − 1|`, `|y_j/x_j − 1|` below the tolerance.
    S2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BowenParams {
    pub r: f64,
    pub epsilon: f64,
    pub n_samples: usize,
    pub n_rotations: usize,
    pub seed: u64,
}

impl BowenParams {
    pub fn new(r: f64, epsilon: f64) -> Self {
        Self { r, epsilon, n_samples: 64, n_rotations: 16, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), BowenError> {
        if !(self.r > 0.0) || !(self.epsilon > 0.0) {
            return Err(BowenError::InvalidParams("R and epsilon must be positive".into()));
        }
        if self.n_samples < 64 || self.n_rotations < 16 {
            return Err(BowenError::InvalidParams(format!(
                "need n_samples >= 64 and n_rotations >= 16, got {} and {}",
                self.n_samples, self.n_rotations
            )));
        }
        Ok(())
    }

    fn boundary_count(&self) -> usize {
        self.n_samples.div_ceil(self.n_rotations) * self.n_rotations
    }
}

/// `φ̂_x = φ_x ∘ τ_x` for a point with a closed-form chart.
#[derive(Debug, Clone)]
pub struct LeafSampler {
    field: LinearVectorField,
    x: AmbientPoint,
    map: CoveringMap2D,
}

impl LeafSampler {
    pub fn new(field: &LinearVectorField, x: &AmbientPoint) -> Result<Self, BowenError> {
        let chart = LeafChart::new(field, x)?;
        let map = CoveringMap2D::new(&chart)?;
        Ok(Self { field: field.clone(), x: x.clone(), map })
    }

    pub fn point(&self) -> &AmbientPoint {
        &self.x
    }

    pub fn covering(&self) -> &CoveringMap2D {
        &self.map
    }

    /// `φ̂_x(ξ)`.
    pub fn eval(&self, xi: Complex64) -> AmbientPoint {
        leaf_eval(&self.field, &self.x, self.map.eval(xi))
    }
}

/// The fixed sample of `𝔻_R`: a boundary circle whose size is a multiple of
/// the rotation grid, plus a Fibonacci spiral inside.
#[derive(Debug, Clone)]
struct DiscSample {
    boundary: Vec<Complex64>,
    interior: Vec<Complex64>,
    step: usize,
}

impl DiscSample {
    fn new(params: &BowenParams) -> Self {
        let rad = disc_radius(params.r);
        let nb = params.boundary_count();
        let phase = TAU * ((params.seed as f64 * 0.618_033_988_749_895).fract()) / nb as f64;
        let boundary = (0..nb).map(|i| Complex64::from_polar(rad, phase + TAU * i as f64 / nb as f64)).collect();
        let ni = (params.n_samples / 4).max(16);
        let golden = TAU * (1.0 - 0.618_033_988_749_895);
        let interior = (0..ni)
            .map(|i| Complex64::from_polar(rad * ((i as f64 + 0.5) / ni as f64).sqrt(), phase + golden * i as f64))
            .collect();
        Self { boundary, interior, step: nb / params.n_rotations }
    }
}

/// Outcome of one distance estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BowenEstimate {
    pub bound: MetricBound,
    /// Best rotation found.
    pub theta: f64,
    /// Sample point realizing the sup at `theta`.
    pub witness: Complex64,
    /// Sampling-resolution bound used to widen the estimate.
    pub resolution: f64,
    /// Set when leaves may be annuli (rational eigenvalue ratio).
    pub non_simply_connected: bool,
}

fn sup_at(a: &[AmbientPoint], b: &LeafSampler, pts: &[Complex64], rot: Complex64) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (p, xi)) in a.iter().zip(pts).enumerate() {
        let d = p.log_distance(&b.eval(rot * xi));
        if d > best.0 {
            best = (d, i);
        }
    }
    best
}

fn difference(a: &AmbientPoint, b: &AmbientPoint) -> Vec<Complex64> {
    a.to_complex().iter().zip(b.to_complex()).map(|(u, v)| u - v).collect()
}

/// Bowen-distance estimator with a cached sample of one side.
#[derive(Debug, Clone)]
pub struct BowenEngine {
    params: BowenParams,
    sample: DiscSample,
}

/// A leaf with its sample images cached.
#[derive(Debug, Clone)]
pub struct CachedLeaf {
    sampler: LeafSampler,
    boundary: Vec<AmbientPoint>,
    interior: Vec<AmbientPoint>,
}

impl CachedLeaf {
    pub fn point(&self) -> &AmbientPoint {
        self.sampler.point()
    }
}

impl BowenEngine {
    pub fn new(params: BowenParams) -> Result<Self, BowenError> {
        params.validate()?;
        let sample = DiscSample::new(&params);
        Ok(Self { params, sample })
    }

    pub fn params(&self) -> &BowenParams {
        &self.params
    }

    pub fn cache(&self, field: &LinearVectorField, x: &AmbientPoint) -> Result<CachedLeaf, BowenError> {
        let sampler = LeafSampler::new(field, x)?;
        let boundary = self.sample.boundary.iter().map(|&xi| sampler.eval(xi)).collect();
        let interior = self.sample.interior.iter().map(|&xi| sampler.eval(xi)).collect();
        Ok(CachedLeaf { sampler, boundary, interior })
    }

    /// Boundary-only sup with `y` rotated by `shift` sample steps.
    fn grid_sup(&self, x: &CachedLeaf, y: &CachedLeaf, shift: usize) -> f64 {
        let n = x.boundary.len();
        (0..n).map(|i| x.boundary[i].log_distance(&y.boundary[(i + shift) % n])).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn distance(&self, field: &LinearVectorField, x: &CachedLeaf, y: &CachedLeaf) -> BowenEstimate {
        let nb = self.sample.boundary.len();
        let dtheta = TAU / nb as f64;
        let mut best = (f64::INFINITY, 0usize);
        for m in 0..self.params.n_rotations {
            let shift = m * self.sample.step;
            let v = self.grid_sup(x, y, shift);
            if v < best.0 {
                best = (v, shift);
            }
        }
        let boundary_sup = |theta: f64| sup_at(&x.boundary, &y.sampler, &self.sample.boundary, Complex64::from_polar(1.0, theta)).0;
        let centre = best.1 as f64 * dtheta;
        let half = self.sample.step as f64 * dtheta;
        let (mut a, mut b) = (centre - half, centre + half);
        let g = 0.618_033_988_749_895;
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (boundary_sup(c), boundary_sup(d));
        for _ in 0..28 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = boundary_sup(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = boundary_sup(d);
            }
        }
        let mut theta = if fc < fd { c } else { d };
        if best.0 <= fc.min(fd) {
            theta = centre;
        }
        let rot = Complex64::from_polar(1.0, theta);
        let (bs, bi) = sup_at(&x.boundary, &y.sampler, &self.sample.boundary, rot);
        let (is, ii) = sup_at(&x.interior, &y.sampler, &self.sample.interior, rot);
        let (log_est, witness) =
            if bs >= is { (bs, self.sample.boundary[bi]) } else { (is, self.sample.interior[ii]) };
        let diffs: Vec<Vec<Complex64>> = x
            .boundary
            .iter()
            .zip(&self.sample.boundary)
            .map(|(p, xi)| difference(p, &y.sampler.eval(rot * xi)))
            .collect();
        let resolution = (0..nb)
            .map(|i| {
                let (u, v) = (&diffs[i], &diffs[(i + 1) % nb]);
                u.iter().zip(v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max);
        let est = log_est.exp();
        BowenEstimate {
            bound: MetricBound::two_sided((est - resolution).max(0.0), est + resolution),
            theta: theta.rem_euclid(TAU),
            witness,
            resolution,
            non_simply_connected: field.has_rational_ratio(),
        }
    }
}

/// Estimate of the Bowen distance between the leaves through `x` and `y`.
pub fn bowen_distance(
    field: &LinearVectorField,
    x: &AmbientPoint,
    y: &AmbientPoint,
    params: &BowenParams,
) -> Result<BowenEstimate, BowenError> {
    let engine = BowenEngine::new(params.clone())?;
    let (a, b) = (engine.cache(field, x)?, engine.cache(field, y)?);
    Ok(engine.distance(field, &a, &b))
}

/// Witness that two retained points are `ε`-separated.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCertificate {
    pub i: usize,
    pub j: usize,
    pub xi: Complex64,
    pub theta: f64,
    /// Lower end of the distance enclosure; `> ε` up to `resolution`.
    pub distance: f64,
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedSet {
    /// Indices into the input sample, in scan order.
    pub indices: Vec<usize>,
    pub points: Vec<AmbientPoint>,
    pub certificates: Vec<PairCertificate>,
    pub max_resolution: f64,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Decides whether two cached leaves are more than `ε` apart; cheap when the
/// base points already are (the sup includes `ξ = 0` for every rotation).
fn separation(engine: &BowenEngine, field: &LinearVectorField, a: &CachedLeaf, b: &CachedLeaf, eps: f64) -> (bool, f64, Complex64, f64, f64) {
    let base = a.point().distance(b.point());
    if base > eps {
        return (true, base, Complex64::new(0.0, 0.0), 0.0, 0.0);
    }
    let e = engine.distance(field, a, b);
    (e.bound.hi > eps, e.bound.lo, e.witness, e.theta, e.resolution)
}

fn greedy(
    engine: &BowenEngine,
    field: &LinearVectorField,
    leaves: &[CachedLeaf],
    eps: f64,
    seed_set: &[usize],
) -> SeparatedSet {
    let mut kept: Vec<usize> = seed_set.to_vec();
    let mut certificates = Vec::new();
    let mut max_resolution: f64 = 0.0;
    for cand in 0..leaves.len() {
        if kept.contains(&cand) {
            continue;
        }
        let checks: Vec<(bool, f64, Complex64, f64, f64)> =
            kept.par_iter().map(|&k| separation(engine, field, &leaves[k], &leaves[cand], eps)).collect();
        if checks.iter().all(|c| c.0) {
            for (&k, c) in kept.iter().zip(&checks) {
                max_resolution = max_resolution.max(c.4);
                certificates.push(PairCertificate { i: k, j: cand, xi: c.2, theta: c.3, distance: c.1, resolution: c.4 });
            }
            kept.push(cand);
        }
    }
    kept.sort_unstable();
    SeparatedSet {
        points: kept.iter().map(|&i| leaves[i].point().clone()).collect(),
        indices: kept,
        certificates,
        max_resolution,
    }
}

/// Greedy maximal `ε`-separated subset in input order.
pub fn separated_set(
    field: &LinearVectorField,
    sample: &[ModelPoint],
    params: &BowenParams,
) -> Result<SeparatedSet, BowenError> {
    let engine = BowenEngine::new(params.clone())?;
    let leaves = sample.iter().map(|p| engine.cache(field, p)).collect::<Result<Vec<_>, _>>()?;
    Ok(greedy(&engine, field, &leaves, params.epsilon, &[]))
}

/// Compact set used for entropy counts.
#[derive(Debug, Clone, PartialEq)]
pub enum KDescription {
    /// Product of `n` equally spaced real values in `(−h, h)` per coordinate
    /// (cell midpoints, so zero is avoided for even `n`).
    Grid { half_width: f64, n: usize, k: usize },
    Points(Vec<ModelPoint>),
}

impl KDescription {
    pub fn points(&self) -> Result<Vec<ModelPoint>, BowenError> {
        match self {
            KDescription::Points(p) => Ok(p.clone()),
            KDescription::Grid { half_width, n, k } => {
                let vals: Vec<f64> =
                    (0..*n).map(|i| -half_width + (i as f64 + 0.5) * 2.0 * half_width / *n as f64).collect();
                let mut out: Vec<Vec<Complex64>> = vec![vec![]];
                for _ in 0..*k {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            vals.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(Complex64::new(*v, 0.0));
                                q
                            })
                        })
                        .collect();
                }
                out.iter().map(|z| ModelPoint::from_complex(z).map_err(BowenError::from)).collect()
            }
        }
    }
}

/// How `ε` is chosen per row.
#[derive(Debug, Clone, PartialEq)]
pub enum EpsilonRule {
    /// `ε = e^{−R}`.
    ExpMinusR,
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRow {
    pub r: f64,
    pub epsilon: f64,
    pub n: usize,
    /// `log N / R`.
    pub rate: f64,
    pub max_resolution: f64,
}

/// Separated-set counts for each `(R, ε)`. For a fixed `R` the `ε` values are
/// processed from large to small and each greedy pass starts from the previous
/// retained set, so `N` is non-increasing in `ε` by construction.
pub fn entropy_estimate(
    field: &LinearVectorField,
    k: &KDescription,
    r_list: &[f64],
    eps: &EpsilonRule,
    base: &BowenParams,
) -> Result<Vec<EntropyRow>, BowenError> {
    if r_list.is_empty() {
        return Err(BowenError::InvalidParams("empty R list".into()));
    }
    let pts = k.points()?;
    let mut rows = Vec::new();
    for &r in r_list {
        let mut eps_list = match eps {
            EpsilonRule::ExpMinusR => vec![(-r).exp()],
            EpsilonRule::Fixed(v) if !v.is_empty() => v.clone(),
            EpsilonRule::Fixed(_) => return Err(BowenError::InvalidParams("empty epsilon list".into())),
        };
        eps_list.sort_by(|a, b| b.total_cmp(a));
        let params = BowenParams { r, epsilon: eps_list[0], ..base.clone() };
        let engine = BowenEngine::new(params)?;
        let leaves = pts.iter().map(|p| engine.cache(field, p)).collect::<Result<Vec<_>, _>>()?;
        let mut prev: Vec<usize> = Vec::new();
        for &e in &eps_list {
            let set = greedy(&engine, field, &leaves, e, &prev);
            rows.push(EntropyRow {
                r,
                epsilon: e,
                n: set.len(),
                rate: (set.len() as f64).ln() / r,
                max_resolution: set.max_resolution,
            });
            prev = set.indices;
        }
    }
    Ok(rows)
}

/// Result of sampling `τ_x(𝔻_{7R})` against `Ω_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub samples: usize,
    pub violations: usize,
    pub min_margin: f64,
    /// `(floor(log10 margin), count)` for positive margins.
    pub margin_histogram: Vec<(i32, usize)>,
    /// Largest log-modulus of `φ̂_x` over the sample.
    pub max_log_modulus: f64,
    /// `log ρ′` tracked alongside; not asserted.
    pub rho_prime_log: f64,
}

fn histogram(margins: &[f64]) -> Vec<(i32, usize)> {
    let mut bins: std::collections::BTreeMap<i32, usize> = Default::default();
    for m in margins.iter().filter(|m| **m > 0.0) {
        *bins.entry(m.log10().floor() as i32).or_default() += 1;
    }
    bins.into_iter().collect()
}

fn two_dim(field: &LinearVectorField) -> Result<(), BowenError> {
    if field.k() > 2 {
        return Err(HyperbolicError::ShapeUnavailable(field.k()).into());
    }
    Ok(())
}

/// Samples the hyperbolic ball of radius `7R` in `Π_x` and tests membership in
/// `Ω_x` (margin `e^{−20λR}`, cap `e^{20λR}`).
pub fn verify_lemma_3r(
    field: &LinearVectorField,
    x: &ModelPoint,
    constants: &PaperConstants,
    n: usize,
    seed: u64,
) -> Result<ContainmentReport, BowenError> {
    two_dim(field)?;
    let l = x.norm1_log();
    if !(l >= constants.alpha1_log() && l <= constants.rho().ln()) {
        return Err(BowenError::PreconditionViolated(format!(
            "log‖x‖₁ = {l} outside [log α₁, log ρ] = [{}, {}]",
            constants.alpha1_log(),
            constants.rho().ln()
        )));
    }
    let chart = LeafChart::new(field, x)?;
    let omega = RegionOmega::from_constants(chart.clone(), constants);
    let sample = hyperbolic_ball_sample(&chart, 7.0 * constants.r(), n, seed)?;
    let margins: Vec<f64> = sample.points.par_iter().map(|z| omega.margin_of(*z)).collect();
    let max_log_modulus = sample
        .points
        .par_iter()
        .map(|z| leaf_eval(field, x, *z).norm1_log())
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(ContainmentReport {
        samples: margins.len(),
        violations: margins.iter().filter(|m| **m < 0.0).count(),
        min_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
        margin_histogram: histogram(&margins),
        max_log_modulus,
        rho_prime_log: constants.rho_prime_log(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatteningReport {
    pub flattened: ModelPoint,
    /// Largest log-modulus of the flattened coordinates over `φ̂_x(𝔻_{7R})`.
    pub tail_max_log_modulus: f64,
    /// `−3R`.
    pub tail_bound_log: f64,
    pub tail_ok: bool,
    pub bowen: BowenEstimate,
    /// `e^{−2R}`.
    pub bowen_bound: f64,
    pub close_ok: bool,
}

/// Coordinates `j ≥ m` (0-based) of `x` tiny: the leaf stays in
/// `𝔻^m × e^{−3R}𝔻^{k−m}` and is close to the leaf of the flattened point.
pub fn verify_flattening(
    field: &LinearVectorField,
    x: &ModelPoint,
    m: usize,
    constants: &PaperConstants,
    params: &BowenParams,
) -> Result<FlatteningReport, BowenError> {
    two_dim(field)?;
    if !(x.norm1_log() > constants.alpha1_log()) {
        return Err(BowenError::PreconditionViolated("‖x‖₁ <= α₁".into()));
    }
    let cut = LN_2 + constants.alpha2_log();
    if let Some(j) = (m..x.k()).find(|&j| !(x.coord(j).log_modulus() <= cut)) {
        return Err(BowenError::PreconditionViolated(format!("|x_{j}| > 2α₂")));
    }
    let r = constants.r();
    let flat = ModelPoint::new((0..x.k()).map(|j| if j < m { x.coord(j) } else { Coord::Zero }).collect())?;
    let chart = LeafChart::new(field, x)?;
    let sample = hyperbolic_ball_sample(&chart, 7.0 * r, params.n_samples.max(1000), params.seed)?;
    let tail = sample
        .points
        .par_iter()
        .map(|z| {
            let y = leaf_eval(field, x, *z);
            (m..y.k()).map(|j| y.coord(j).log_modulus()).fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let bp = BowenParams { r, ..params.clone() };
    let bowen = bowen_distance(field, x, &flat, &bp)?;
    let bowen_bound = (-2.0 * r).exp();
    Ok(FlatteningReport {
        flattened: flat,
        tail_max_log_modulus: tail,
        tail_bound_log: -3.0 * r,
        tail_ok: tail < -3.0 * r,
        close_ok: bowen.bound.hi <= bowen_bound,
        bowen,
        bowen_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearZeroReport {
    /// Largest log-modulus over `φ̂_x(𝔻_R)` and `φ̂_y(𝔻_R)`.
    pub max_log_modulus: f64,
    /// `−2R`.
    pub bound_log: f64,
    pub containment_ok: bool,
    pub bowen: BowenEstimate,
    /// `e^{−R}`.
    pub bowen_bound: f64,
    pub close_ok: bool,
}

/// Two points with `‖·‖₁ ≤ 2α₁` have leaves inside `e^{−2R}𝔻^k` on `𝔻_R`, hence close.
pub fn verify_near_zero(
    field: &LinearVectorField,
    x: &ModelPoint,
    y: &ModelPoint,
    constants: &PaperConstants,
    params: &BowenParams,
) -> Result<NearZeroReport, BowenError> {
    two_dim(field)?;
    let cut = LN_2 + constants.alpha1_log();
    for (name, p) in [("x", x), ("y", y)] {
        if !(p.norm1_log() <= cut) {
            return Err(BowenError::PreconditionViolated(format!("log‖{name}‖₁ > log 2α₁")));
        }
    }
    let r = constants.r();
    let mut worst = f64::NEG_INFINITY;
    for p in [x, y] {
        let chart = LeafChart::new(field, p)?;
        let sample = hyperbolic_ball_sample(&chart, r, params.n_samples.max(1000), params.seed)?;
        let m = sample.points.iter().map(|z| leaf_eval(field, p, *z).norm1_log()).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(m);
    }
    let bp = BowenParams { r, ..params.clone() };
    let bowen = bowen_distance(field, x, y, &bp)?;
    let bowen_bound = (-r).exp();
    Ok(NearZeroReport {
        max_log_modulus: worst,
        bound_log: -2.0 * r,
        containment_ok: worst <= -2.0 * r,
        close_ok: bowen.bound.hi <= bowen_bound,
        bowen,
        bowen_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellClosenessReport {
    pub clauses: Vec<Clause>,
    /// Largest `max(|x_j/y_j − 1|, |y_j/x_j − 1|)` over (S2) coordinates.
    pub max_ratio_deviation: f64,
    pub ratio_tolerance: f64,
    pub bowen: BowenEstimate,
    /// `e^{−R}`.
    pub bowen_bound: f64,
    pub close_ok: bool,
    /// `sup ‖Ψ_{x,y}(φ̂_x(ξ)) − φ̂_x(ξ)‖` over the boundary sample.
    pub psi_deviation: f64,
}

/// Per-coordinate clause check.
pub fn closeness_clauses(x: &AmbientPoint, y: &AmbientPoint, constants: &PaperConstants) -> Result<(Vec<Clause>, f64), BowenError> {
    let a2 = constants.alpha2_log();
    let tol = constants.ratio_tolerance();
    let mut clauses = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..x.k() {
        let (a, b) = (x.coord(j), y.coord(j));
        let (sa, sb) = (a.log_modulus() < a2, b.log_modulus() < a2);
        if sa && sb {
            clauses.push(Clause::S1);
            continue;
        }
        if sa || sb {
            return Err(BowenError::ConditionUnmet { coordinate: j, clause: Clause::S1 });
        }
        let d = a.log_ratio(&b).expect("nonzero coordinates");
        let dev = crate::cmath::cexpm1(d).norm().max(crate::cmath::cexpm1(-d).norm());
        if !(dev < tol) {
            return Err(BowenError::ConditionUnmet { coordinate: j, clause: Clause::S2 });
        }
        worst = worst.max(dev);
        clauses.push(Clause::S2);
    }
    Ok((clauses, worst))
}

/// Log of `‖Ψ_{x,y}(z) − z‖` with `Ψ_{x,y}(z)_j = (y_j/x_j) z_j`.
pub fn psi_deviation_log(x: &AmbientPoint, y: &AmbientPoint, z: &AmbientPoint) -> f64 {
    0.5 * log_sum_exp((0..z.k()).map(|j| match x.coord(j).log_ratio(&y.coord(j)) {
        Some(d) => 2.0 * (z.coord(j).log_modulus() + crate::cmath::cexpm1(-d).norm().ln()),
        None => f64::NEG_INFINITY,
    }))
}

/// Points in the same small cell have close leaves.
pub fn verify_cell_closeness(
    field: &LinearVectorField,
    x: &ModelPoint,
    y: &ModelPoint,
    constants: &PaperConstants,
    params: &BowenParams,
) -> Result<CellClosenessReport, BowenError> {
    two_dim(field)?;
    let (clauses, worst) = closeness_clauses(x, y, constants)?;
    let r = constants.r();
    let bp = BowenParams { r, ..params.clone() };
    let engine = BowenEngine::new(bp)?;
    let (a, b) = (engine.cache(field, x)?, engine.cache(field, y)?);
    let bowen = engine.distance(field, &a, &b);
    let psi = a
        .boundary
        .iter()
        .chain(&a.interior)
        .map(|z| psi_deviation_log(x, y, z))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let bowen_bound = (-r).exp();
    Ok(CellClosenessReport {
        clauses,
        max_ratio_deviation: worst,
        ratio_tolerance: constants.ratio_tolerance(),
        close_ok: bowen.bound.hi <= bowen_bound,
        bowen,
        bowen_bound,
        psi_deviation: psi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeMode {
    /// `|log(log‖y‖₁ / log‖x‖₁)| / dist_P(0, ξ)`.
    Speed,
    /// `log((−log‖y‖₂) / log⋆‖x‖₂) / dist_P(0, ξ)` with `log⋆ s = 1 + |log s|`.
    Depth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeReport {
    pub mode: EscapeMode,
    /// Smallest constant valid for every sampled point.
    pub exponent: f64,
    /// Largest `|log(log‖y‖/log‖x‖)|` (speed) or depth ratio log (depth).
    pub max_log_ratio: f64,
    pub samples: usize,
}

/// Radial geodesics from 0 towards the given endpoints, `n_steps` points each.
pub fn radial_targets(r: f64, n_dirs: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_dirs).map(|_| Complex64::from_polar(disc_radius(r), TAU * rng.gen::<f64>())).collect()
}

/// Escape speed (or depth) along radial geodesics `[0, ξ]` of `𝔻`, pushed to
/// the leaf of `x`; every path point must stay in `½𝔻^k`.
pub fn verify_escape_speed(
    field: &LinearVectorField,
    x: &ModelPoint,
    targets: &[Complex64],
    n_steps: usize,
    mode: EscapeMode,
) -> Result<EscapeReport, BowenError> {
    two_dim(field)?;
    let leaf = LeafSampler::new(field, x)?;
    let lx1 = x.norm1_log();
    let lx2 = x.norm2_log();
    let log_star = 1.0 + lx2.abs();
    let mut exponent: f64 = 0.0;
    let mut max_ratio: f64 = 0.0;
    let mut count = 0;
    for (ti, end) in targets.iter().enumerate() {
        let total = disc_distance(Complex64::new(0.0, 0.0), *end);
        for s in 1..=n_steps {
            let dist = total * s as f64 / n_steps as f64;
            let xi = end / end.norm() * disc_radius(dist);
            let y = leaf.eval(xi);
            if !(y.norm1_log() <= -LN_2) {
                return Err(BowenError::PathLeavesChart(ti * n_steps + s - 1));
            }
            let v = match mode {
                EscapeMode::Speed => (y.norm1_log() / lx1).ln().abs(),
                EscapeMode::Depth => ((-y.norm2_log()) / log_star).ln(),
            };
            max_ratio = max_ratio.max(v);
            exponent = exponent.max(v / dist);
            count += 1;
        }
    }
    Ok(EscapeReport { mode, exponent, max_log_ratio: max_ratio, samples: count })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub alpha: f64,
    pub worst_ratio: f64,
    /// `(floor(log10 dist), max ratio)` by decade, closest pairs first.
    pub by_decade: Vec<(i32, f64)>,
    /// Max ratio never grows as the distance decade shrinks (1% slack).
    pub non_increasing: bool,
}

/// `max |η̂(x) − η̂(y)| / ‖x − y‖^α` over pairs with all log-moduli above
/// `min_log_modulus`.
pub fn eta_holder_probe(
    field: &LinearVectorField,
    pairs: &[(ModelPoint, ModelPoint)],
    alpha: f64,
    min_log_modulus: f64,
) -> Result<HolderReport, BowenError> {
    two_dim(field)?;
    let mut by: std::collections::BTreeMap<i32, f64> = Default::default();
    let mut worst: f64 = 0.0;
    for (i, (x, y)) in pairs.iter().enumerate() {
        if x.coords().iter().chain(y.coords()).any(|c| !(c.log_modulus() > min_log_modulus)) {
            return Err(BowenError::PairTooCloseToHyperplane(i));
        }
        let d = x.distance(y);
        if d == 0.0 {
            continue;
        }
        let diff = (eta_hat(field, x)?.lo - eta_hat(field, y)?.lo).abs();
        let ratio = diff / d.powf(alpha);
        worst = worst.max(ratio);
        let e = by.entry(d.log10().floor() as i32).or_insert(0.0);
        *e = e.max(ratio);
    }
    let by_decade: Vec<(i32, f64)> = by.into_iter().collect();
    let non_increasing = by_decade.windows(2).all(|w| w[0].1 <= w[1].1 * 1.01);
    Ok(HolderReport { alpha, worst_ratio: worst, by_decade, non_increasing })
}

/// `(6λ*)^{−1}`.
pub fn holder_exponent(field: &LinearVectorField) -> f64 {
    1.0 / (6.0 * field.lambda_star())
}
