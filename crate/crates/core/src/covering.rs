//! Planar disc coverings: multi-covering refinement with containment
//! witnesses, satellite discs, quasi-roundness, hyperbolic disc covers of
//! `𝔻_{mħ}`, the `Γ`-curve check, and the `F_D`/`F_x` trees.

use crate::cells::Displacement;
use crate::hyperbolic::{disc_distance, disc_radius, uniform_disc_point, CoveringMap2D, HyperbolicError};
use crate::linear_model::{leaf_eval, AmbientPoint, LeafChart, LinearVectorField, ModelError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoveringError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hyperbolic(#[from] HyperbolicError),
    #[error("invalid disc radius {0}")]
    InvalidDisc(f64),
    #[error("covering {0} misses a point of K")]
    NotACovering(usize),
    #[error("covering {covering} has {count} discs, more than M = {m}")]
    TooManyDiscs { covering: usize, count: usize, m: usize },
    #[error("no coverings given")]
    Empty,
    #[error("sector {0}: centre outside its sector")]
    BadSectorAssignment(usize),
    #[error("winding number of Γ about 0 is {0}")]
    WindingCheckFailed(i64),
    #[error("oracle failed at level {level}, vertex {index}")]
    OracleFailure { level: usize, index: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    center: Complex64,
    radius: f64,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Result<Self, CoveringError> {
        if !(radius > 0.0 && radius.is_finite() && center.re.is_finite() && center.im.is_finite()) {
            return Err(CoveringError::InvalidDisc(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `ρD`: same centre, radius scaled.
    pub fn scaled(&self, rho: f64) -> Self {
        Self { center: self.center, radius: rho * self.radius }
    }

    pub fn doubled(&self) -> Self {
        self.scaled(2.0)
    }

    pub fn contains(&self, p: Complex64) -> bool {
        (p - self.center).norm() <= self.radius
    }

    /// `other ⊆ self` as closed discs.
    pub fn contains_disc(&self, other: &Disc) -> bool {
        (other.center - self.center).norm() + other.radius <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covering {
    pub target: Vec<Complex64>,
    pub discs: Vec<Disc>,
}

impl Covering {
    /// Index of the first uncovered point, if any.
    pub fn first_miss(&self) -> Option<usize> {
        self.target.iter().position(|p| !self.discs.iter().any(|d| d.contains(*p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscKind {
    /// A disc of the later covering, kept as is.
    Original,
    /// A lattice disc centred in `ρ(ℤ+iℤ)`.
    Lattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementResult {
    pub discs: Vec<Disc>,
    /// `witnesses[d][i]` indexes a disc of input covering `i`.
    pub witnesses: Vec<Vec<usize>>,
    pub kinds: Vec<DiscKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementCheck {
    pub count: usize,
    /// `200^n · M` in floating point.
    pub bound: f64,
    pub containment_violations: usize,
    pub uncovered: usize,
}

impl RefinementCheck {
    pub fn ok(&self) -> bool {
        (self.count as f64) <= self.bound && self.containment_violations == 0 && self.uncovered == 0
    }
}

impl RefinementResult {
    /// Exhaustive check of count, doubled containment and coverage.
    pub fn check(&self, k: &[Complex64], discs: &[Vec<Disc>], m: usize) -> RefinementCheck {
        let containment_violations = self
            .discs
            .iter()
            .zip(&self.witnesses)
            .map(|(d, w)| w.iter().enumerate().filter(|(i, &j)| !discs[*i][j].doubled().contains_disc(&d.doubled())).count())
            .sum();
        let uncovered = k.iter().filter(|p| !self.discs.iter().any(|d| d.contains(**p))).count();
        RefinementCheck {
            count: self.discs.len(),
            bound: 200f64.powi(discs.len() as i32) * m as f64,
            containment_violations,
            uncovered,
        }
    }
}

/// Refines `n` coverings of `K` into one whose doubled discs sit inside the
/// doubles of one disc from each input. Pairwise, left to right. A disc `D₂`
/// of the next covering is kept when `radius(D₁) > 2 radius(D₂)` and
/// `2D₂ ⊆ 2W` holds for the current disc `D₁` and all its witnesses; otherwise
/// the points of `K` in `D₁ ∩ D₂` get lattice discs of radius
/// `ρ = min(r₁, r₂)/3` centred at their nearest point of `ρ(ℤ+iℤ)`.
pub fn refine(k: &[Complex64], coverings: &[Vec<Disc>], m: usize) -> Result<RefinementResult, CoveringError> {
    if coverings.is_empty() {
        return Err(CoveringError::Empty);
    }
    for (i, c) in coverings.iter().enumerate() {
        if c.len() > m {
            return Err(CoveringError::TooManyDiscs { covering: i, count: c.len(), m });
        }
        if k.iter().any(|p| !c.iter().any(|d| d.contains(*p))) {
            return Err(CoveringError::NotACovering(i));
        }
    }
    let first = &coverings[0];
    let mut cur = RefinementResult {
        discs: first.clone(),
        witnesses: (0..first.len()).map(|j| vec![j]).collect(),
        kinds: vec![DiscKind::Original; first.len()],
    };
    for (stage, next) in coverings.iter().enumerate().skip(1) {
        let prev_w: Vec<Vec<Disc>> = cur
            .witnesses
            .iter()
            .map(|w| w.iter().enumerate().map(|(i, &j)| coverings[i][j]).collect())
            .collect();
        let mut out = RefinementResult { discs: vec![], witnesses: vec![], kinds: vec![] };
        let mut originals: HashMap<usize, usize> = HashMap::new();
        let mut lattice: HashMap<(i64, i64, u64), usize> = HashMap::new();
        for &z in k {
            if out.discs.iter().any(|d| d.contains(z)) {
                continue;
            }
            let i1 = cur.discs.iter().position(|d| d.contains(z)).expect("current stage covers K");
            let i2 = next.iter().position(|d| d.contains(z)).expect("checked above");
            let (d1, d2) = (cur.discs[i1], next[i2]);
            let mut wit = cur.witnesses[i1].clone();
            wit.push(i2);
            let fits = |d: &Disc| {
                let dd = d.doubled();
                d1.doubled().contains_disc(&dd) && prev_w[i1].iter().all(|w| w.doubled().contains_disc(&dd)) && d2.doubled().contains_disc(&dd)
            };
            if d1.radius > 2.0 * d2.radius && fits(&d2) {
                originals.entry(i2).or_insert_with(|| {
                    out.discs.push(d2);
                    out.witnesses.push(wit.clone());
                    out.kinds.push(DiscKind::Original);
                    out.discs.len() - 1
                });
                continue;
            }
            let rho = d1.radius.min(d2.radius) / 3.0;
            let (a, b) = ((z.re / rho).round() as i64, (z.im / rho).round() as i64);
            let disc = Disc::new(Complex64::new(a as f64 * rho, b as f64 * rho), rho)?;
            if !fits(&disc) {
                return Err(CoveringError::InvalidParams(format!("lattice disc fails containment at stage {stage}")));
            }
            lattice.entry((a, b, rho.to_bits())).or_insert_with(|| {
                out.discs.push(disc);
                out.witnesses.push(wit);
                out.kinds.push(DiscKind::Lattice);
                out.discs.len() - 1
            });
        }
        cur = out;
    }
    Ok(cur)
}

/// 100 discs of radius `r/10` centred at distance `1.05r`, angles `2πn/100`.
pub fn satellites(d: &Disc) -> Vec<Disc> {
    (0..100)
        .map(|n| Disc {
            center: d.center + Complex64::from_polar(1.05 * d.radius, TAU * n as f64 / 100.0),
            radius: 0.1 * d.radius,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteCheck {
    /// Satellites `s` with `2s ⊄ 2D`.
    pub containment_failures: usize,
    /// Annulus samples between `r` and `1.1r` outside `D ∪ satellites`.
    pub misses: usize,
    pub samples: usize,
}

pub fn satellite_check(d: &Disc, n: usize, seed: u64) -> SatelliteCheck {
    let sats = satellites(d);
    let containment_failures = sats.iter().filter(|s| !d.doubled().contains_disc(&s.doubled())).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = d.radius;
    let misses = (0..n)
        .filter(|_| {
            let rad = (r * r + rng.gen::<f64>() * (1.21 - 1.0) * r * r).sqrt();
            let p = d.center + Complex64::from_polar(rad, TAU * rng.gen::<f64>());
            !d.contains(p) && !sats.iter().any(|s| s.contains(p))
        })
        .count();
    SatelliteCheck { containment_failures, misses, samples: n }
}

/// Convex hull, counter-clockwise (monotone chain).
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| (a - o).re * (b - o).im - (a - o).im * (b - o).re;
    let mut hull: Vec<Complex64> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex64>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Signed distance from `q` to the boundary of a CCW convex polygon, positive inside.
fn hull_depth(hull: &[Complex64], q: Complex64) -> f64 {
    (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            let e = b - a;
            (e.re * (q - a).im - e.im * (q - a).re) / e.norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiRound {
    pub ok: bool,
    pub disc: Disc,
    /// `(1.1 r − max |s − c|) / r`.
    pub outer_margin: f64,
    /// Smallest hull depth over a grid of `D′`, divided by `r`.
    pub inner_margin: f64,
    /// Allowed inner shortfall from the hull's longest edge, relative to `r`.
    pub sag: f64,
}

/// `D′ ⊆ image ⊆ (11/10)D′`, with the image approximated by the hull of the
/// sample. Without a candidate, `D′` is the largest disc about the centroid of
/// the hull vertices that fits inside the hull.
pub fn quasi_round_check(sample: &[Complex64], candidate: Option<Disc>) -> Result<QuasiRound, CoveringError> {
    let hull = convex_hull(sample);
    if hull.len() < 3 {
        return Err(CoveringError::InvalidParams("degenerate sample".into()));
    }
    let disc = match candidate {
        Some(d) => d,
        None => {
            let c = hull.iter().sum::<Complex64>() / hull.len() as f64;
            Disc::new(c, hull_depth(&hull, c))?
        }
    };
    let r = disc.radius;
    let far = sample.iter().map(|s| (s - disc.center).norm()).fold(0.0, f64::max);
    let outer_margin = (1.1 * r - far) / r;
    let n = 24;
    let mut inner = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=n {
            let q = Complex64::new(-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
            if q.norm() <= 1.0 {
                inner = inner.min(hull_depth(&hull, disc.center + r * q));
            }
        }
    }
    for a in 0..64 {
        inner = inner.min(hull_depth(&hull, disc.center + Complex64::from_polar(r, TAU * a as f64 / 64.0)));
    }
    let inner_margin = inner / r;
    // a sampled boundary cuts corners by about the chord sag `L²/8r`; allow twice that
    let edge = (0..hull.len()).map(|i| (hull[(i + 1) % hull.len()] - hull[i]).norm()).fold(0.0, f64::max);
    let sag = edge * edge / (4.0 * r * r);
    Ok(QuasiRound { ok: outer_margin >= 0.0 && inner_margin >= -sag, disc, outer_margin, inner_margin, sag })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverParams {
    pub m1: u32,
    pub hbar: f64,
    pub m: u32,
}

impl CoverParams {
    fn validate(&self) -> Result<(), CoveringError> {
        if self.m < 3 || self.m1 < 4 || !(self.hbar > 0.0) {
            return Err(CoveringError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Which discs are claimed to cover `𝔻_{mħ}` besides `𝔻(0, (m−1)ħ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverMode {
    /// One centre per angular sector of `𝔻_{m₁ħ} ∖ 𝔻_{3ħ}`; `None` removes a sector.
    Sectors { centres: Vec<Option<Complex64>> },
    /// A closed polygon `Γ` cut into `p` arcs, and perturbed arc endpoints `ξ′_j`.
    Gamma { curve: Vec<Complex64>, p: usize, perturbed: Vec<Complex64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest coverage slack in hyperbolic units (negative at violations).
    pub min_slack: f64,
    /// Violations per angular sector of the sample (`n` sectors, `n` = centre count).
    pub violations_by_sector: Vec<usize>,
    /// Gamma mode: largest Poincaré arc length, its bound `m₁^{−2}ħ`, winding number.
    pub arc_max_length: Option<f64>,
    pub arc_bound: Option<f64>,
    pub winding: Option<i64>,
    /// Gamma mode: `Γ ⊂ 𝔻_{m₁ħ} ∖ 𝔻_{4ħ}`.
    pub curve_in_annulus: Option<bool>,
}

impl CoverReport {
    pub fn arc_ok(&self) -> Option<bool> {
        Some(self.arc_max_length? < self.arc_bound?)
    }
}

/// Winding number of a closed polygon about 0.
pub fn winding_number(curve: &[Complex64]) -> i64 {
    let total: f64 = (0..curve.len())
        .map(|i| {
            let (a, b) = (curve[i], curve[(i + 1) % curve.len()]);
            (b / a).arg()
        })
        .sum();
    (total / TAU).round() as i64
}

/// `|ξ−ζ|² / |1−ξ̄ζ|²`, monotone in the Poincaré distance.
fn pseudo2(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm_sqr() / (Complex64::new(1.0, 0.0) - a.conj() * b).norm_sqr()
}

fn from_pseudo2(q: f64) -> f64 {
    2.0 * q.sqrt().atanh()
}

/// Samples `𝔻_{mħ}` uniformly in hyperbolic area and checks it lies in
/// `𝔻(0,(m−1)ħ) ∪ ⋃_j 𝔻(c_j,(m−2)ħ)`.
pub fn hyperbolic_cover_check(mode: &CoverMode, params: &CoverParams, n: usize, seed: u64) -> Result<CoverReport, CoveringError> {
    params.validate()?;
    let h = params.hbar;
    let (m, m1) = (params.m as f64, params.m1 as f64);
    let zero = Complex64::new(0.0, 0.0);
    let mut report = CoverReport {
        samples: n,
        violations: 0,
        min_slack: f64::INFINITY,
        violations_by_sector: vec![],
        arc_max_length: None,
        arc_bound: None,
        winding: None,
        curve_in_annulus: None,
    };
    let centres: Vec<Complex64> = match mode {
        CoverMode::Sectors { centres } => {
            let ns = centres.len();
            for (j, c) in centres.iter().enumerate() {
                if let Some(c) = c {
                    let d = disc_distance(zero, *c);
                    let a = c.arg().rem_euclid(TAU);
                    let lo = TAU * j as f64 / ns as f64;
                    let hi = TAU * (j + 1) as f64 / ns as f64;
                    if !(d >= 3.0 * h && d <= m1 * h && a >= lo && a < hi) {
                        return Err(CoveringError::BadSectorAssignment(j));
                    }
                }
            }
            centres.iter().flatten().copied().collect()
        }
        CoverMode::Gamma { curve, p, perturbed } => {
            if curve.len() < 3 || *p == 0 || curve.len() % p != 0 {
                return Err(CoveringError::InvalidParams("curve length must be a positive multiple of p".into()));
            }
            let w = winding_number(curve);
            report.winding = Some(w);
            if w == 0 {
                return Err(CoveringError::WindingCheckFailed(w));
            }
            let per = curve.len() / p;
            let arc = (0..*p)
                .map(|a| (0..per).map(|i| disc_distance(curve[a * per + i], curve[(a * per + i + 1) % curve.len()])).sum::<f64>())
                .fold(0.0, f64::max);
            report.arc_max_length = Some(arc);
            report.arc_bound = Some(h / (m1 * m1));
            report.curve_in_annulus = Some(curve.iter().all(|c| {
                let d = disc_distance(zero, *c);
                d > 4.0 * h && d < m1 * h
            }));
            perturbed.clone()
        }
    };
    let nsec = match mode {
        CoverMode::Sectors { centres } => centres.len(),
        CoverMode::Gamma { p, .. } => *p,
    }
    .max(1);
    report.violations_by_sector = vec![0; nsec];
    let t_center = disc_radius((m - 1.0) * h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Complex64> = (0..n).map(|_| uniform_disc_point(&mut rng, m * h)).collect();
    let slacks: Vec<f64> = pts
        .par_iter()
        .map(|&s| {
            let centre_slack = (m - 1.0) * h - disc_distance(zero, s);
            if s.norm() <= 0.5 * t_center {
                return centre_slack;
            }
            let best = centres.iter().map(|c| pseudo2(s, *c)).fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                centre_slack.max((m - 2.0) * h - from_pseudo2(best.min(1.0 - 1e-16)))
            } else {
                centre_slack
            }
        })
        .collect();
    for (s, slack) in pts.iter().zip(&slacks) {
        report.min_slack = report.min_slack.min(*slack);
        if *slack < 0.0 {
            report.violations += 1;
            let sec = ((s.arg().rem_euclid(TAU) / TAU * nsec as f64) as usize).min(nsec - 1);
            report.violations_by_sector[sec] += 1;
        }
    }
    Ok(report)
}

/// Sector-midpoint centres: hyperbolic radius `(m₁+3)ħ/2`, angle at the middle.
pub fn sector_midpoints(m1: u32, hbar: f64, n_sectors: usize) -> Vec<Option<Complex64>> {
    let r = disc_radius(0.5 * (m1 as f64 + 3.0) * hbar);
    (0..n_sectors).map(|j| Some(Complex64::from_polar(r, TAU * (j as f64 + 0.5) / n_sectors as f64))).collect()
}

/// A circle of hyperbolic radius `radius` about 0 sampled at `per_arc·p`
/// points, and its arc endpoints moved by hyperbolic distance `shift`.
pub fn gamma_circle(radius: f64, p: usize, per_arc: usize, shift: f64, seed: u64) -> CoverMode {
    let n = p * per_arc;
    let r = disc_radius(radius);
    let curve: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(r, TAU * i as f64 / n as f64)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbed = (0..p)
        .map(|a| {
            let c = curve[a * per_arc];
            let w = Complex64::from_polar(disc_radius(shift), TAU * rng.gen::<f64>());
            (c + w) / (Complex64::new(1.0, 0.0) + c.conj() * w)
        })
        .collect();
    CoverMode::Gamma { curve, p, perturbed }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaParams {
    pub m0: u32,
    pub m1: u32,
    pub hbar: f64,
    pub p: usize,
    /// Samples per arc.
    pub per_arc: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    /// Closest and farthest Poincaré distance of `Γ` from 0.
    pub min_radius: f64,
    pub max_radius: f64,
    /// `min_radius − 4ħ` and `m₁ħ − max_radius`.
    pub inner_margin: f64,
    pub outer_margin: f64,
    pub arc_max_length: f64,
    pub arc_bound: f64,
    /// `t ≥ m₀ħ`.
    pub t_lower_ok: bool,
    pub ok: bool,
}

/// `Γ = τ_x⁻¹{|ζ| = −t log‖x‖₁}` against the annulus `𝔻_{m₁ħ} ∖ 𝔻_{4ħ}` and
/// the arc-length bound for `p` arcs.
pub fn verify_gamma(field: &LinearVectorField, x: &AmbientPoint, t: f64, params: &GammaParams) -> Result<GammaReport, CoveringError> {
    let chart = LeafChart::new(field, x)?;
    let map = CoveringMap2D::new(&chart)?;
    let rad = -t * x.norm1_log();
    let n = params.p * params.per_arc;
    let zero = Complex64::new(0.0, 0.0);
    let pts: Vec<Complex64> = (0..n)
        .map(|i| {
            let z = Complex64::from_polar(rad, TAU * i as f64 / n as f64);
            if chart.contains(z) { map.inverse(z) } else { Complex64::new(1.0, 0.0) }
        })
        .collect();
    let dists: Vec<f64> = pts.iter().map(|p| if p.norm() < 1.0 { disc_distance(zero, *p) } else { f64::INFINITY }).collect();
    let min_radius = dists.iter().copied().fold(f64::INFINITY, f64::min);
    let max_radius = dists.iter().copied().fold(0.0, f64::max);
    let arc_max_length = (0..params.p)
        .map(|a| (0..params.per_arc).map(|i| {
            let j = a * params.per_arc + i;
            let (u, v) = (pts[j], pts[(j + 1) % n]);
            if u.norm() < 1.0 && v.norm() < 1.0 { disc_distance(u, v) } else { f64::INFINITY }
        }).sum::<f64>())
        .fold(0.0, f64::max);
    let h = params.hbar;
    let m1 = params.m1 as f64;
    let inner_margin = min_radius - 4.0 * h;
    let outer_margin = m1 * h - max_radius;
    let arc_bound = h / (m1 * m1);
    let t_lower_ok = t >= params.m0 as f64 * h;
    Ok(GammaReport {
        min_radius,
        max_radius,
        inner_margin,
        outer_margin,
        arc_max_length,
        arc_bound,
        t_lower_ok,
        ok: inner_margin > 0.0 && outer_margin > 0.0 && arc_max_length < arc_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeLabel {
    Disc(Disc),
    Point(Complex64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeVertex {
    pub label: TreeLabel,
    /// Index into the previous level.
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Oracle returned NONE.
    pub exceptional: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafTree {
    pub levels: Vec<Vec<TreeVertex>>,
    pub p: usize,
}

impl LeafTree {
    pub fn vertex_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// `|F(m)| ≤ p^m` for every level.
    pub fn level_bounds_hold(&self) -> bool {
        self.levels.iter().enumerate().all(|(m, l)| (l.len() as f64) <= (self.p as f64).powi(m as i32))
    }

    /// Poincaré length of every edge (point labels only), by child level.
    pub fn edge_lengths(&self) -> Vec<Vec<f64>> {
        (1..self.levels.len())
            .map(|m| {
                self.levels[m]
                    .iter()
                    .filter_map(|v| match (v.label, self.levels[m - 1][v.parent?].label) {
                        (TreeLabel::Point(a), TreeLabel::Point(b)) => Some(disc_distance(a, b)),
                        _ => None,
                    })
                    .collect()
            })
            .collect()
    }
}

/// Children of a vertex, `None` for an exceptional one, or a failure message.
pub type OracleAnswer = Result<Option<Vec<TreeLabel>>, String>;

/// Level-synchronous construction. The oracle returns the children of a
/// vertex, or `None` for an exceptional vertex.
pub fn build_tree<F>(root: TreeLabel, mut oracle: F, depth: usize, p: usize) -> Result<LeafTree, CoveringError>
where
    F: FnMut(&TreeLabel, usize) -> OracleAnswer,
{
    let mut levels = vec![vec![TreeVertex { label: root, parent: None, children: vec![], exceptional: false }]];
    for level in 0..depth {
        let mut next = Vec::new();
        for index in 0..levels[level].len() {
            let label = levels[level][index].label;
            match oracle(&label, level).map_err(|_| CoveringError::OracleFailure { level, index })? {
                None => levels[level][index].exceptional = true,
                Some(kids) => {
                    if kids.len() > p {
                        return Err(CoveringError::OracleFailure { level, index });
                    }
                    for kid in kids {
                        levels[level][index].children.push(next.len());
                        next.push(TreeVertex { label: kid, parent: Some(index), children: vec![], exceptional: false });
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    Ok(LeafTree { levels, p })
}

/// `F_x` children of `ξ`: move the leaf point `φ̂_x(ξ)` by the `J`-displacements
/// `−t log‖z‖₁ e^{2πil/n}` and pull back to `𝔻`. Exceptional once the leaf
/// point leaves `ρ𝔻^k` or a child leaves the chart.
pub fn local_model_oracle(
    field: &LinearVectorField,
    x: &AmbientPoint,
    t: f64,
    n_dirs: u64,
    rho_log: f64,
) -> Result<impl FnMut(&TreeLabel, usize) -> OracleAnswer, CoveringError> {
    let chart = LeafChart::new(field, x)?;
    let map = CoveringMap2D::new(&chart)?;
    let field = field.clone();
    let x = x.clone();
    let disp = Displacement { t, p: n_dirs, alpha1_log: f64::NEG_INFINITY };
    Ok(move |label: &TreeLabel, _level: usize| {
        let TreeLabel::Point(xi) = *label else { return Err("disc label in F_x".to_string()) };
        let zeta = map.eval(xi);
        let z = leaf_eval(&field, &x, zeta);
        if z.norm1_log() > rho_log {
            return Ok(None);
        }
        let mut kids = Vec::with_capacity(n_dirs as usize);
        for l in 0..n_dirs {
            let target = zeta + disp.zeta(&z, l);
            if !chart.contains(target) {
                return Ok(None);
            }
            kids.push(TreeLabel::Point(map.inverse(target)));
        }
        Ok(Some(kids))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLeafReport {
    /// `(level, index)` of vertices outside `𝔻_{m₁mħ}`.
    pub containment_violations: Vec<(usize, usize)>,
    /// Largest `dist(0, a) / (m₁ m ħ)` over levels `m ≥ 1`.
    pub max_ratio: f64,
    pub max_edge: f64,
    pub cover_vertices: usize,
    pub cover_violations: usize,
}

/// Level-`m` vertices lie in `𝔻_{m₁mħ}`; at fully branched vertices `a`,
/// `𝔻(a, cover_m ħ)` is sampled against `𝔻(a,(cover_m−1)ħ) ∪ ⋃ 𝔻(a_i,(cover_m−1)ħ)`.
pub fn verify_discrete_leaf(tree: &LeafTree, m1: u32, hbar: f64, cover_m: u32, samples: usize, seed: u64) -> DiscreteLeafReport {
    let zero = Complex64::new(0.0, 0.0);
    let point = |v: &TreeVertex| match v.label {
        TreeLabel::Point(p) => p,
        TreeLabel::Disc(d) => d.center,
    };
    let mut report = DiscreteLeafReport { containment_violations: vec![], max_ratio: 0.0, max_edge: 0.0, cover_vertices: 0, cover_violations: 0 };
    for (m, level) in tree.levels.iter().enumerate().skip(1) {
        let bound = m1 as f64 * m as f64 * hbar;
        for (i, v) in level.iter().enumerate() {
            let d = disc_distance(zero, point(v));
            report.max_ratio = report.max_ratio.max(d / bound);
            if !(d <= bound) {
                report.containment_violations.push((m, i));
            }
        }
    }
    report.max_edge = tree.edge_lengths().iter().flatten().copied().fold(0.0, f64::max);
    let cm = cover_m as f64;
    let small2 = disc_radius((cm - 1.0) * hbar).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (m, level) in tree.levels.iter().enumerate() {
        if m + 1 >= tree.levels.len() {
            break;
        }
        for v in level.iter().filter(|v| !v.exceptional && v.children.len() == tree.p) {
            report.cover_vertices += 1;
            let a = point(v);
            let kids: Vec<Complex64> = v.children.iter().map(|&c| point(&tree.levels[m + 1][c])).collect();
            for _ in 0..samples {
                let w = uniform_disc_point(&mut rng, cm * hbar);
                let s = (w + a) / (Complex64::new(1.0, 0.0) + a.conj() * w);
                if !(pseudo2(s, a) <= small2 || kids.iter().any(|k| pseudo2(s, *k) <= small2)) {
                    report.cover_violations += 1;
                }
            }
        }
    }
    report
}

/// Moves `child` away from `parent` along their geodesic so the edge is `factor` times longer.
pub fn lengthen_edge(parent: Complex64, child: Complex64, factor: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let w = (child - parent) / (one - parent.conj() * child);
    let d = disc_distance(parent, child);
    let w2 = Complex64::from_polar(disc_radius(factor * d), w.arg());
    (w2 + parent) / (one + parent.conj() * w2)
}

/// Drops `count` consecutive sector centres starting at `from` (ablation).
pub fn remove_sectors(centres: &mut [Option<Complex64>], from: usize, count: usize) {
    let n = centres.len();
    for j in from..from + count {
        centres[j % n] = None;
    }
}
