//! The log-radial lattice Σ (rings of constant log-ratio crossed by
//! equidistributed rays), the product cells of the polydisc, the displacement
//! maps `J_l` and the plaque intersection used to compare them.

use crate::cmath::{cexpm1, wrap_angle};
use crate::linear_model::{leaf_eval, AmbientPoint, Coord, LinearVectorField, ModelError, ModelPoint, PaperConstants};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CellError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("malformed cell index at coordinate {0}")]
    MalformedIndex(usize),
    #[error("displaced point leaves the polydisc (l = {l})")]
    DisplacementLeavesPolydisc { l: u64, point: AmbientPoint },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no solution inside the plaque (|ζ| = {0})")]
    NoSmallSolution(f64),
}

/// `n_rings` rings of log-width `growth_log` starting at `r_min_log`, crossed by
/// `n_rays` equidistributed rays.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaLattice {
    r_min_log: f64,
    growth_log: f64,
    n_rings: u64,
    n_rays: u64,
}

/// Per-coordinate cell label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellCoord {
    Center,
    Ring { ring: u64, sector: u64 },
}

/// Product cell of the polydisc.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex(pub Vec<CellCoord>);

impl SigmaLattice {
    pub fn new(r_min_log: f64, growth_log: f64, n_rings: u64, n_rays: u64) -> Result<Self, CellError> {
        let bad = |m: String| Err(CellError::InvalidLattice(m));
        if !(r_min_log < 0.0) || !(growth_log > 0.0) {
            return bad(format!("need r_min_log < 0 < growth_log, got {r_min_log}, {growth_log}"));
        }
        if n_rays < 8 {
            return bad(format!("n_rays = {n_rays} < 8"));
        }
        if n_rings == 0 {
            return bad("n_rings = 0".into());
        }
        let s = Self { r_min_log, growth_log, n_rings, n_rays };
        if s.ring_log(n_rings) > 0.0 {
            return bad("outermost ring lies outside the unit disc".into());
        }
        Ok(s)
    }

    /// Rings filling `[r_min_log, 0]`.
    pub fn filling(r_min_log: f64, growth_log: f64, n_rays: u64) -> Result<Self, CellError> {
        let n = (-r_min_log / growth_log).floor();
        if !(n >= 1.0 && n < 9.0e15) {
            return Err(CellError::InvalidLattice(format!("{n} rings cannot be indexed exactly")));
        }
        let mut n = n as u64;
        while n > 1 && r_min_log + n as f64 * growth_log > 0.0 {
            n -= 1;
        }
        Self::new(r_min_log, growth_log, n, n_rays)
    }

    /// Stand-in lattice at the (possibly scaled) exponent `λR` of `constants`:
    /// inner radius `α₂`, ring ratio `e^{e^{−23λR}}` and `⌈2π e^{23λR}⌉` rays, so
    /// both sides of a cell are about `|a|·e^{−23λR}`.
    pub fn from_constants(constants: &PaperConstants) -> Result<Self, CellError> {
        let lr = constants.lr();
        let growth = (-23.0 * lr).exp();
        let rays = (TAU * (23.0 * lr).exp()).ceil();
        if rays > 9.0e15 {
            return Err(CellError::InvalidLattice(format!("{rays} rays cannot be indexed exactly")));
        }
        Self::filling(constants.alpha2_log(), growth, (rays as u64).max(8))
    }

    pub fn r_min_log(&self) -> f64 {
        self.r_min_log
    }
    pub fn growth_log(&self) -> f64 {
        self.growth_log
    }
    pub fn n_rings(&self) -> u64 {
        self.n_rings
    }
    pub fn n_rays(&self) -> u64 {
        self.n_rays
    }

    /// Same rings, `factor` times as many rays.
    pub fn with_refined_rays(&self, factor: u64) -> Result<Self, CellError> {
        Self::new(self.r_min_log, self.growth_log, self.n_rings, self.n_rays * factor)
    }

    /// Inner log-radius of ring `i` (monotone in `i`).
    pub fn ring_log(&self, i: u64) -> f64 {
        self.r_min_log + i as f64 * self.growth_log
    }

    /// Lower ray angle of sector `s`.
    pub fn ray_angle(&self, s: u64) -> f64 {
        s as f64 * TAU / self.n_rays as f64
    }

    fn ring_of(&self, l: f64) -> Option<u64> {
        if l < self.r_min_log {
            return None;
        }
        let q = ((l - self.r_min_log) / self.growth_log).floor();
        let mut i = if q < 0.0 { 0 } else { (q as u64).min(self.n_rings - 1) };
        // Boundaries are the computed ring radii themselves.
        while i + 1 < self.n_rings && self.ring_log(i + 1) <= l {
            i += 1;
        }
        while i > 0 && self.ring_log(i) > l {
            i -= 1;
        }
        Some(i)
    }

    fn sector_of(&self, arg: f64) -> u64 {
        let a = wrap_angle(arg);
        let q = (a * self.n_rays as f64 / TAU).floor();
        let mut s = if q < 0.0 { 0 } else { (q as u64).min(self.n_rays - 1) };
        while s + 1 < self.n_rays && self.ray_angle(s + 1) <= a {
            s += 1;
        }
        while s > 0 && self.ray_angle(s) > a {
            s -= 1;
        }
        s
    }

    pub fn cell_coord(&self, c: &Coord) -> CellCoord {
        match c {
            Coord::Zero => CellCoord::Center,
            Coord::Polar { log_modulus, argument } => match self.ring_of(*log_modulus) {
                None => CellCoord::Center,
                Some(ring) => CellCoord::Ring { ring, sector: self.sector_of(*argument) },
            },
        }
    }

    /// Half-open cell lookup. Points beyond the outermost ring (still in the
    /// polydisc) belong to the last ring.
    pub fn cell_of(&self, x: &AmbientPoint) -> CellIndex {
        CellIndex(x.coords().iter().map(|c| self.cell_coord(c)).collect())
    }

    /// Lower-left vertex of a cell; `Center` maps to zero.
    pub fn cell_vertex(&self, idx: &CellIndex) -> Result<ModelPoint, CellError> {
        let coords = idx
            .0
            .iter()
            .enumerate()
            .map(|(j, c)| match *c {
                CellCoord::Center => Ok(Coord::Zero),
                CellCoord::Ring { ring, sector } if ring < self.n_rings && sector < self.n_rays => {
                    Ok(Coord::Polar { log_modulus: self.ring_log(ring), argument: self.ray_angle(sector) })
                }
                _ => Err(CellError::MalformedIndex(j)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ModelPoint::new(coords)?)
    }

    /// `(n_rings·n_rays + 1)^k`, `None` on overflow.
    pub fn cell_count(&self, k: u32) -> Option<u128> {
        (self.n_rings as u128).checked_mul(self.n_rays as u128)?.checked_add(1)?.checked_pow(k)
    }

    /// Snap to the vertex of the containing cell.
    pub fn snap(&self, x: &AmbientPoint) -> Result<ModelPoint, CellError> {
        self.cell_vertex(&self.cell_of(x))
    }
}

/// Symbolic lattice at full size: `e^{46λR}` rings and
/// `⌈e^{23λR}⌉` rays per disc. Only logarithms are stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperModeLattice {
    pub lr: f64,
}

impl PaperModeLattice {
    pub fn new(lr: f64) -> Self {
        Self { lr }
    }

    pub fn n_rings_log(&self) -> f64 {
        46.0 * self.lr
    }

    /// `log ⌈e^{23λR}⌉ ≤ 23λR + log(1 + e^{−23λR})`.
    pub fn n_rays_log(&self) -> f64 {
        23.0 * self.lr + (-23.0 * self.lr).exp().ln_1p()
    }

    /// Upper bound on `log cell_count = k·log(n_rings·n_rays + 1)`.
    pub fn cell_count_log(&self, k: u32) -> f64 {
        let prod = self.n_rings_log() + self.n_rays_log();
        k as f64 * (prod + (-prod).exp().ln_1p())
    }

    /// `log count ≤ 70λkR`.
    pub fn count_certified(&self, k: u32) -> bool {
        self.cell_count_log(k) <= 70.0 * self.lr * k as f64
    }
}

/// Displacement time `t`, number of directions `p` and the lower modulus
/// `log α₁` used by the preimage bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub t: f64,
    pub p: u64,
    pub alpha1_log: f64,
}

impl From<&PaperConstants> for Displacement {
    fn from(c: &PaperConstants) -> Self {
        Self { t: c.t(), p: c.p(), alpha1_log: c.alpha1_log() }
    }
}

impl Displacement {
    /// `−t·log‖x‖₁·e^{2πil/p}`.
    pub fn zeta(&self, x: &AmbientPoint, l: u64) -> Complex64 {
        let theta = TAU * (l % self.p) as f64 / self.p as f64;
        -self.t * x.norm1_log() * Complex64::from_polar(1.0, theta)
    }
}

/// Result of `J_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct JMap {
    pub z: AmbientPoint,
    pub zeta: Complex64,
    pub cell: CellIndex,
    pub vertex: ModelPoint,
}

/// `J_l(x)`: displace along the leaf to `z^l = φ_x(−t log‖x‖₁ e^{2πil/p})`
/// and snap to the vertex of its cell.
pub fn j_map(
    field: &LinearVectorField,
    lattice: &SigmaLattice,
    x: &ModelPoint,
    l: u64,
    disp: &Displacement,
) -> Result<JMap, CellError> {
    if x.is_zero() {
        return Err(CellError::PreconditionViolated("x = 0".into()));
    }
    let zeta = disp.zeta(x, l);
    let z = leaf_eval(field, x, zeta);
    if !z.in_polydisc() {
        return Err(CellError::DisplacementLeavesPolydisc { l, point: z });
    }
    let cell = lattice.cell_of(&z);
    let vertex = lattice.cell_vertex(&cell)?;
    Ok(JMap { z, zeta, cell, vertex })
}

/// `min_{j,l} |Re(t e^{2πil/p} λ_j) + 1|`, evaluated at the candidate `l`
/// nearest to the angles where the real part could reach `−1`.
pub fn real_part_gap(field: &LinearVectorField, t: f64, p: u64) -> f64 {
    let value = |lam: Complex64, l: u64| {
        let theta = TAU * (l % p) as f64 / p as f64;
        ((t * Complex64::from_polar(1.0, theta) * lam).re + 1.0).abs()
    };
    let mut best = f64::INFINITY;
    for &lam in field.lambdas() {
        let m = t * lam.norm();
        let mut targets = vec![PI];
        if m >= 1.0 {
            let psi = (-1.0 / m).acos();
            targets = vec![psi, -psi];
        }
        for psi in targets {
            let theta = wrap_angle(psi - lam.arg());
            let centre = (theta * p as f64 / TAU).round() as i64;
            for d in -2..=2i64 {
                let l = (centre + d).rem_euclid(p as i64) as u64;
                best = best.min(value(lam, l));
            }
        }
    }
    best
}

/// Sample points mapped to `y` by `J_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preimages {
    pub count: usize,
    /// Indices into the sample.
    pub witnesses: Vec<usize>,
    /// Sample points whose displacement left the polydisc.
    pub escaped: usize,
}

pub fn preimage_count(
    field: &LinearVectorField,
    lattice: &SigmaLattice,
    y: &ModelPoint,
    l: u64,
    sample: &[ModelPoint],
    disp: &Displacement,
) -> Result<Preimages, CellError> {
    if let Some(j) = y.coords().iter().position(|c| !(c.log_modulus() > disp.alpha1_log)) {
        return Err(CellError::PreconditionViolated(format!("|y_{j}| <= alpha1")));
    }
    let target = lattice.cell_of(y);
    let hits: Vec<Option<bool>> = sample
        .par_iter()
        .map(|x| match j_map(field, lattice, x, l, disp) {
            Ok(j) => Some(j.cell == target),
            Err(_) => None,
        })
        .collect();
    let witnesses: Vec<usize> = hits.iter().enumerate().filter(|(_, h)| **h == Some(true)).map(|(i, _)| i).collect();
    Ok(Preimages { count: witnesses.len(), witnesses, escaped: hits.iter().filter(|h| h.is_none()).count() })
}

/// Largest multiplicity of `J_l` on a sample (the empirical `M̂`).
pub fn max_multiplicity(
    field: &LinearVectorField,
    lattice: &SigmaLattice,
    l: u64,
    sample: &[ModelPoint],
    disp: &Displacement,
) -> usize {
    let cells: Vec<Option<CellIndex>> =
        sample.par_iter().map(|x| j_map(field, lattice, x, l, disp).ok().map(|j| j.cell)).collect();
    let mut counts: BTreeMap<CellIndex, usize> = BTreeMap::new();
    for c in cells.into_iter().flatten() {
        *counts.entry(c).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

/// All lattice vertices whose (ring, sector) lie within the given half-widths
/// of the cell of `centre`, coordinate by coordinate.
pub fn vertex_window(lattice: &SigmaLattice, centre: &AmbientPoint, ring_half: u64, sector_half: u64) -> Vec<ModelPoint> {
    let per_coord: Vec<Vec<CellCoord>> = lattice
        .cell_of(centre)
        .0
        .iter()
        .map(|c| match *c {
            CellCoord::Center => vec![CellCoord::Center],
            CellCoord::Ring { ring, sector } => {
                let r0 = ring.saturating_sub(ring_half);
                let r1 = (ring + ring_half).min(lattice.n_rings() - 1);
                let n = lattice.n_rays() as i64;
                let mut out = Vec::new();
                for r in r0..=r1 {
                    for ds in -(sector_half as i64)..=(sector_half as i64) {
                        let s = (sector as i64 + ds).rem_euclid(n) as u64;
                        out.push(CellCoord::Ring { ring: r, sector: s });
                    }
                }
                out
            }
        })
        .collect();
    let mut cells: Vec<Vec<CellCoord>> = vec![vec![]];
    for options in &per_coord {
        cells = cells
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.push(*c);
                    v
                })
            })
            .collect();
    }
    cells.into_iter().filter_map(|c| lattice.cell_vertex(&CellIndex(c)).ok()).collect()
}

/// Empirical preimage bound under ray refinement: for each factor `f`, the
/// largest `J_l` multiplicity on the vertex window around `centre` (sector
/// half-width scaled by `f` so the window covers the same region).
pub fn refinement_study(
    field: &LinearVectorField,
    lattice: &SigmaLattice,
    centre: &AmbientPoint,
    l: u64,
    ring_half: u64,
    sector_half: u64,
    factors: &[u64],
    disp: &Displacement,
) -> Result<Vec<usize>, CellError> {
    factors
        .iter()
        .map(|&f| {
            let lat = lattice.with_refined_rays(f)?;
            let sample = vertex_window(&lat, centre, ring_half, sector_half * f);
            Ok(max_multiplicity(field, &lat, l, &sample, disp))
        })
        .collect()
}

/// Point `w^l` of the plaque of `z` whose coordinate `j0` equals the target.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaqueIntersection {
    pub zeta: Complex64,
    pub w: AmbientPoint,
    /// `log(w_j / z_j) = λ_j ζ`.
    pub log_deviation: Vec<Complex64>,
    /// `|z_j / w_j − 1|`.
    pub ratio_deviation: Vec<f64>,
}

impl PlaqueIntersection {
    /// `max_j |z_j/w_j − 1| / growth_log`.
    pub fn gamma_hat(&self, growth_log: f64) -> f64 {
        self.ratio_deviation.iter().copied().fold(0.0, f64::max) / growth_log
    }
}

/// Solves `φ_z(ζ)_{j0} = target` with the branch of smallest `|ζ|`, provided the
/// solution stays in the plaque of ambient radius `eps0·‖z‖₁`.
pub fn plaque_intersect(
    field: &LinearVectorField,
    z: &AmbientPoint,
    j0: usize,
    target: Coord,
    eps0: f64,
) -> Result<PlaqueIntersection, CellError> {
    let ratio = target
        .log_ratio(&z.coord(j0))
        .ok_or_else(|| CellError::PreconditionViolated(format!("coordinate {j0} is zero")))?;
    let zeta = ratio / field.lambda(j0);
    let w = leaf_eval(field, z, zeta);
    if w.log_distance(z) > eps0.ln() + z.norm1_log() {
        return Err(CellError::NoSmallSolution(zeta.norm()));
    }
    let log_deviation: Vec<Complex64> = field.lambdas().iter().map(|l| l * zeta).collect();
    let ratio_deviation = z
        .coords()
        .iter()
        .zip(&log_deviation)
        .map(|(c, d)| if c.is_zero() { 0.0 } else { cexpm1(-d).norm() })
        .collect();
    Ok(PlaqueIntersection { zeta, w, log_deviation, ratio_deviation })
}
