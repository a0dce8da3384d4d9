//! The generic linear vector field `Σ λ_j z_j ∂/∂z_j`, its points in log-polar
//! form, the leaf parametrization `φ_x(ζ) = (x_j e^{λ_j ζ})` and the leaf domain
//! `Π_x` (a convex polygon in the ζ-plane).

use crate::cmath::{cexpm1, log_sum_exp, wrap_angle, wrap_signed};
use num_complex::Complex64;
use thiserror::Error;

/// Two boundary lines count as parallel below this sine.
pub const PARALLEL_SINE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("eigenvalue {0} is zero")]
    ZeroEigenvalue(usize),
    #[error("the field has no eigenvalues")]
    EmptyField,
    #[error("point has {got} coordinates, field has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("all coordinates are zero")]
    AllCoordinatesZero,
    #[error("coordinate {0} has log-modulus {1} >= 0 (outside the open polydisc)")]
    OutsidePolydisc(usize, f64),
    #[error("point {0} lies outside the leaf chart")]
    PointOutsideChart(Complex64),
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
}

/// `F(z) = Σ λ_j z_j ∂/∂z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearVectorField {
    lambdas: Vec<Complex64>,
    lambda_star: f64,
}

impl LinearVectorField {
    pub fn new(lambdas: Vec<Complex64>) -> Result<Self, ModelError> {
        if lambdas.is_empty() {
            return Err(ModelError::EmptyField);
        }
        if let Some(j) = lambdas.iter().position(|l| l.norm() == 0.0 || !l.norm().is_finite()) {
            return Err(ModelError::ZeroEigenvalue(j));
        }
        let max = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let min = lambdas.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
        Ok(Self { lambdas, lambda_star: max / min })
    }

    /// Convenience constructor from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, ModelError> {
        Self::new(pairs.iter().map(|&(a, b)| Complex64::new(a, b)).collect())
    }

    /// Divides every eigenvalue by the smallest modulus. Idempotent.
    pub fn normalize(&self) -> Self {
        if self.is_normalized() {
            return self.clone();
        }
        let min = self.lambdas.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
        Self {
            lambdas: self.lambdas.iter().map(|l| l / min).collect(),
            lambda_star: self.lambda_star,
        }
    }

    pub fn is_normalized(&self) -> bool {
        let min = self.lambdas.iter().map(|l| l.norm()).fold(f64::INFINITY, f64::min);
        (min - 1.0).abs() < 1e-12
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn lambda(&self, j: usize) -> Complex64 {
        self.lambdas[j]
    }

    /// `max|λ_j| / min|λ_j|`.
    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    /// True when some ratio `λ_i/λ_j` is real and rational (denominator up to
    /// 1000) within `1e-12`. Leaves are then not simply connected.
    pub fn has_rational_ratio(&self) -> bool {
        for i in 0..self.k() {
            for j in (i + 1)..self.k() {
                let q = self.lambdas[i] / self.lambdas[j];
                if q.im.abs() > 1e-12 * q.norm() {
                    continue;
                }
                for den in 1..=1000u32 {
                    let num = (q.re * den as f64).round();
                    if (q.re - num / den as f64).abs() < 1e-12 * q.re.abs().max(1.0) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// One coordinate of a point: exactly zero, or `e^{log_modulus + i·argument}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Zero,
    Polar { log_modulus: f64, argument: f64 },
}

impl Coord {
    pub fn polar(log_modulus: f64, argument: f64) -> Self {
        Coord::Polar { log_modulus, argument: wrap_angle(argument) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.norm() == 0.0 {
            Coord::Zero
        } else {
            Coord::polar(z.norm().ln(), z.arg())
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coord::Zero)
    }

    /// `-∞` for `Zero`.
    pub fn log_modulus(&self) -> f64 {
        match self {
            Coord::Zero => f64::NEG_INFINITY,
            Coord::Polar { log_modulus, .. } => *log_modulus,
        }
    }

    pub fn argument(&self) -> f64 {
        match self {
            Coord::Zero => 0.0,
            Coord::Polar { argument, .. } => *argument,
        }
    }

    /// May underflow to zero or overflow; use the log-polar form when in doubt.
    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coord::Zero => Complex64::new(0.0, 0.0),
            Coord::Polar { log_modulus, argument } => Complex64::from_polar(log_modulus.exp(), *argument),
        }
    }

    /// Multiply by `e^w`.
    pub fn mul_exp(&self, w: Complex64) -> Self {
        match self {
            Coord::Zero => Coord::Zero,
            Coord::Polar { log_modulus, argument } => Coord::polar(log_modulus + w.re, argument + w.im),
        }
    }

    /// Principal branch of `log(self/other)` (argument difference in `(-π, π]`).
    /// `None` when either coordinate is zero.
    pub fn log_ratio(&self, other: &Coord) -> Option<Complex64> {
        match (self, other) {
            (Coord::Polar { log_modulus: a, argument: s }, Coord::Polar { log_modulus: b, argument: t }) => {
                Some(Complex64::new(a - b, wrap_signed(s - t)))
            }
            _ => None,
        }
    }

    /// `log|self - other|`, computed without cancellation.
    pub fn log_distance(&self, other: &Coord) -> f64 {
        match (self, other) {
            (Coord::Zero, Coord::Zero) => f64::NEG_INFINITY,
            (Coord::Zero, c) | (c, Coord::Zero) => c.log_modulus(),
            (a, b) => {
                let (big, small) = if a.log_modulus() >= b.log_modulus() { (a, b) } else { (b, a) };
                let d = small.log_ratio(big).expect("nonzero");
                big.log_modulus() + cexpm1(d).norm().ln()
            }
        }
    }
}

/// A point of `ℂ^k` in log-polar form, not necessarily inside the polydisc.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint {
    coords: Vec<Coord>,
}

impl AmbientPoint {
    pub fn new(coords: Vec<Coord>) -> Self {
        Self { coords }
    }

    pub fn from_complex(z: &[Complex64]) -> Self {
        Self { coords: z.iter().map(|&w| Coord::from_complex(w)).collect() }
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> Coord {
        self.coords[j]
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    /// `log max_j |z_j|`.
    pub fn norm1_log(&self) -> f64 {
        self.coords.iter().map(Coord::log_modulus).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Coord::is_zero)
    }

    /// Inside the open unit polydisc.
    pub fn in_polydisc(&self) -> bool {
        self.norm1_log() < 0.0
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coords.iter().map(Coord::to_complex).collect()
    }

    /// Log of the Euclidean norm in `ℂ^k`.
    pub fn norm2_log(&self) -> f64 {
        0.5 * log_sum_exp(self.coords.iter().map(|c| 2.0 * c.log_modulus()))
    }

    /// Log of the Euclidean distance in `ℂ^k`.
    pub fn log_distance(&self, other: &AmbientPoint) -> f64 {
        0.5 * log_sum_exp(self.coords.iter().zip(&other.coords).map(|(a, b)| 2.0 * a.log_distance(b)))
    }

    /// Euclidean distance in `ℂ^k` (underflows to 0 for tiny separations).
    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        self.log_distance(other).exp()
    }
}

/// A point of the open unit polydisc.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint(AmbientPoint);

impl ModelPoint {
    pub fn new(coords: Vec<Coord>) -> Result<Self, ModelError> {
        for (j, c) in coords.iter().enumerate() {
            if let Coord::Polar { log_modulus, .. } = c {
                if !(*log_modulus < 0.0) {
                    return Err(ModelError::OutsidePolydisc(j, *log_modulus));
                }
            }
        }
        Ok(Self(AmbientPoint::new(coords)))
    }

    pub fn from_complex(z: &[Complex64]) -> Result<Self, ModelError> {
        Self::new(z.iter().map(|&w| Coord::from_complex(w)).collect())
    }

    /// From `(log_modulus, argument)` pairs; `None` entries are zero.
    pub fn from_log_polar(parts: &[Option<(f64, f64)>]) -> Result<Self, ModelError> {
        Self::new(parts.iter().map(|p| p.map_or(Coord::Zero, |(l, a)| Coord::polar(l, a))).collect())
    }

    pub fn ambient(&self) -> &AmbientPoint {
        &self.0
    }

    pub fn into_ambient(self) -> AmbientPoint {
        self.0
    }
}

impl std::ops::Deref for ModelPoint {
    type Target = AmbientPoint;
    fn deref(&self) -> &AmbientPoint {
        &self.0
    }
}

impl TryFrom<AmbientPoint> for ModelPoint {
    type Error = ModelError;
    fn try_from(p: AmbientPoint) -> Result<Self, ModelError> {
        ModelPoint::new(p.coords)
    }
}

fn check_dim(field: &LinearVectorField, k: usize) -> Result<(), ModelError> {
    if field.k() != k {
        return Err(ModelError::DimensionMismatch { expected: field.k(), got: k });
    }
    Ok(())
}

/// `φ_x(ζ) = (x_j e^{λ_j ζ})_j` in log-polar form. The result may leave the
/// polydisc; check with [`AmbientPoint::in_polydisc`].
pub fn leaf_eval(field: &LinearVectorField, x: &AmbientPoint, zeta: Complex64) -> AmbientPoint {
    AmbientPoint::new(
        x.coords().iter().zip(field.lambdas()).map(|(c, l)| c.mul_exp(l * zeta)).collect(),
    )
}

/// The half-plane `Re(λ_j ζ) < c_j`, i.e. `s_j u − t_j v < c_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub index: usize,
    pub lambda: Complex64,
    pub c: f64,
}

impl Constraint {
    /// `c − Re(λ ζ)`; positive inside.
    pub fn slack(&self, zeta: Complex64) -> f64 {
        self.c - (self.lambda * zeta).re
    }

    /// Signed Euclidean distance to the boundary line, positive inside.
    pub fn signed_distance(&self, zeta: Complex64) -> f64 {
        self.slack(zeta) / self.lambda.norm()
    }

    /// Unit outward normal, as a complex number `n` with `Re(n̄ ζ) = ⟨n, ζ⟩`.
    pub fn normal(&self) -> Complex64 {
        self.lambda.conj() / self.lambda.norm()
    }

    /// Distance from the origin to the boundary line.
    pub fn offset(&self) -> f64 {
        self.c / self.lambda.norm()
    }
}

/// Closed-form shape of a leaf domain with at most two constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape2 {
    /// `⟨normal, ζ⟩ < distance`.
    HalfPlane { distance: f64, normal: Complex64 },
    /// `−(width − offset) < ⟨normal, ζ⟩ < offset`.
    Strip { width: f64, offset: f64, normal: Complex64 },
    /// `{vertex + r e^{iφ} : orientation < φ < orientation + opening_angle}`.
    Wedge { vertex: Complex64, opening_angle: f64, orientation: f64 },
}

/// The leaf domain `Π_x`, one constraint per nonzero coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafChart {
    k: usize,
    constraints: Vec<Constraint>,
    shape2: Option<Shape2>,
}

impl LeafChart {
    /// Builds `Π_x`. `x` must be nonzero with log-moduli `< 0` so that the
    /// origin lies strictly inside.
    pub fn new(field: &LinearVectorField, x: &AmbientPoint) -> Result<Self, ModelError> {
        check_dim(field, x.k())?;
        let constraints: Vec<Constraint> = x
            .coords()
            .iter()
            .enumerate()
            .filter_map(|(j, c)| match c {
                Coord::Zero => None,
                Coord::Polar { log_modulus, .. } => Some(Constraint { index: j, lambda: field.lambda(j), c: -log_modulus }),
            })
            .collect();
        if constraints.is_empty() {
            return Err(ModelError::AllCoordinatesZero);
        }
        if let Some(c) = constraints.iter().find(|c| !(c.c > 0.0)) {
            return Err(ModelError::OutsidePolydisc(c.index, -c.c));
        }
        let shape2 = if field.k() <= 2 { Some(classify(&constraints)) } else { None };
        Ok(Self { k: field.k(), constraints, shape2 })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn shape2(&self) -> Option<Shape2> {
        self.shape2
    }

    pub fn contains(&self, zeta: Complex64) -> bool {
        self.constraints.iter().all(|c| c.slack(zeta) > 0.0)
    }

    /// `min_j (c_j − Re(λ_j a))/|λ_j|`.
    pub fn boundary_distance(&self, a: Complex64) -> Result<f64, ModelError> {
        let d = self.signed_boundary_distance(a);
        if d > 0.0 {
            Ok(d)
        } else {
            Err(ModelError::PointOutsideChart(a))
        }
    }

    /// Like [`Self::boundary_distance`] but negative outside.
    pub fn signed_boundary_distance(&self, a: Complex64) -> f64 {
        self.constraints.iter().map(|c| c.signed_distance(a)).fold(f64::INFINITY, f64::min)
    }

    /// Chart with every `c_j` shifted by `s` (moduli multiplied by `e^{-s}`).
    pub fn translated(&self, s: f64) -> Self {
        let constraints: Vec<Constraint> =
            self.constraints.iter().map(|c| Constraint { c: c.c + s, ..*c }).collect();
        let shape2 = self.shape2.map(|_| classify(&constraints));
        Self { k: self.k, constraints, shape2 }
    }
}

fn classify(constraints: &[Constraint]) -> Shape2 {
    let halfplane = |c: &Constraint| Shape2::HalfPlane { distance: c.offset(), normal: c.normal() };
    match constraints {
        [c] => halfplane(c),
        [a, b] => {
            let (n1, d1) = (a.normal(), a.offset());
            let (n2, d2) = (b.normal(), b.offset());
            let rel = n1.conj() * n2;
            if rel.im.abs() < PARALLEL_SINE {
                if rel.re > 0.0 {
                    if d1 <= d2 {
                        halfplane(a)
                    } else {
                        halfplane(b)
                    }
                } else {
                    Shape2::Strip { width: d1 + d2, offset: d1, normal: n1 }
                }
            } else {
                // Cramer on ⟨n1,V⟩ = d1, ⟨n2,V⟩ = d2.
                let det = n1.re * n2.im - n1.im * n2.re;
                let vertex = Complex64::new((d1 * n2.im - d2 * n1.im) / det, (n1.re * d2 - n2.re * d1) / det);
                let i = Complex64::i();
                let mut t1 = i * n1;
                if (n2.conj() * t1).re > 0.0 {
                    t1 = -t1;
                }
                let mut t2 = i * n2;
                if (n1.conj() * t2).re > 0.0 {
                    t2 = -t2;
                }
                let turn = t1.conj() * t2;
                let opening_angle = turn.im.abs().atan2(turn.re);
                let orientation = if turn.im > 0.0 { t1.arg() } else { t2.arg() };
                Shape2::Wedge { vertex, opening_angle, orientation: wrap_angle(orientation) }
            }
        }
        _ => unreachable!("classification needs one or two constraints"),
    }
}

/// `Ω_x`: constraints shrunk by `margin` (in raw slack units) and `|ζ| ≤ cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionOmega {
    pub parent: LeafChart,
    pub margin: f64,
    pub cap: f64,
}

impl RegionOmega {
    pub fn new(parent: LeafChart, margin: f64, cap: f64) -> Self {
        Self { parent, margin, cap }
    }

    pub fn from_constants(parent: LeafChart, constants: &PaperConstants) -> Self {
        Self::new(parent, constants.omega_margin(), constants.omega_cap())
    }

    pub fn contains(&self, zeta: Complex64) -> bool {
        zeta.norm() <= self.cap && self.parent.constraints().iter().all(|c| c.slack(zeta) >= self.margin)
    }

    /// `min(min_j slack_j − margin, cap − |ζ|)`; nonnegative exactly for members.
    pub fn margin_of(&self, zeta: Complex64) -> f64 {
        let s = self.parent.constraints().iter().map(|c| c.slack(zeta)).fold(f64::INFINITY, f64::min);
        (s - self.margin).min(self.cap - zeta.norm())
    }
}

/// Inputs for [`PaperConstants`]. `exponent_scale` multiplies `λR` inside every
/// `e^{c·λR}` form, so `lr() = λ·R·exponent_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantInputs {
    pub lambda: f64,
    pub r: f64,
    pub exponent_scale: f64,
    pub rho: f64,
    pub c1: f64,
    pub m0: u32,
    pub m1: u32,
    pub hbar: f64,
    pub t: f64,
    pub eps0: f64,
    pub eps1: f64,
    pub kappa: f64,
}

impl Default for ConstantInputs {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            r: 1.0,
            exponent_scale: 1.0,
            rho: 0.9,
            c1: 1.5,
            m0: 15,
            m1: 225,
            hbar: 4e-5,
            t: 9e-4,
            eps0: 0.1,
            eps1: 0.01,
            kappa: 2.0,
        }
    }
}

/// Validated constants. Exponential scales are only ever stored as logs.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperConstants {
    inputs: ConstantInputs,
    p: u64,
    a: f64,
    /// Empirical constants filled in by verification runs.
    pub c0: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c5: Option<f64>,
}

/// Required ratio for every `≪` relation between constants.
pub const MUCH_LESS_RATIO: f64 = 10.0;

impl PaperConstants {
    pub fn new(inputs: ConstantInputs, lambda_star: f64) -> Result<Self, ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConstants(m));
        let ConstantInputs { lambda, r, exponent_scale, rho, c1, m0, m1, hbar, t, eps0, .. } = inputs;
        if !(lambda >= lambda_star) {
            return bad(format!("lambda {lambda} < lambda_star {lambda_star}"));
        }
        if !(r > 0.0) || !(exponent_scale > 0.0) {
            return bad("R and exponent scale must be positive".into());
        }
        if !(rho > 0.0 && rho < 1.0) {
            return bad(format!("rho {rho} not in (0,1)"));
        }
        if !(c1 > 0.0) || !(hbar > 0.0) || !(eps0 > 0.0) || !(inputs.eps1 > 0.0) || !(inputs.kappa > 0.0) {
            return bad("c1, hbar, eps0, eps1, kappa must be positive".into());
        }
        if MUCH_LESS_RATIO * c1 > m0 as f64 {
            return bad(format!("c1 = {c1} is not << m0 = {m0}"));
        }
        if MUCH_LESS_RATIO * c1 * m0 as f64 > m1 as f64 {
            return bad(format!("c1*m0 = {} is not << m1 = {m1}", c1 * m0 as f64));
        }
        if MUCH_LESS_RATIO * m1 as f64 * hbar > eps0 {
            return bad(format!("m1*hbar = {} is not << eps0 = {eps0}", m1 as f64 * hbar));
        }
        if !(m0 as f64 * hbar < t && t < 2.0 * m0 as f64 * hbar) {
            return bad(format!("t = {t} not in (m0*hbar, 2*m0*hbar)"));
        }
        let p = (m1 as u64).checked_pow(4).ok_or_else(|| ModelError::InvalidConstants("m1^4 overflows".into()))?;
        Ok(Self { a: 3.0 * c1 * c1, p, inputs, c0: None, c2: None, c3: None, c5: None })
    }

    pub fn inputs(&self) -> &ConstantInputs {
        &self.inputs
    }
    pub fn lambda(&self) -> f64 {
        self.inputs.lambda
    }
    pub fn r(&self) -> f64 {
        self.inputs.r
    }
    pub fn rho(&self) -> f64 {
        self.inputs.rho
    }
    pub fn m0(&self) -> u32 {
        self.inputs.m0
    }
    pub fn m1(&self) -> u32 {
        self.inputs.m1
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn hbar(&self) -> f64 {
        self.inputs.hbar
    }
    pub fn t(&self) -> f64 {
        self.inputs.t
    }
    pub fn eps0(&self) -> f64 {
        self.inputs.eps0
    }
    pub fn eps1(&self) -> f64 {
        self.inputs.eps1
    }
    pub fn kappa(&self) -> f64 {
        self.inputs.kappa
    }
    pub fn c1(&self) -> f64 {
        self.inputs.c1
    }
    /// `A = 3 c1²`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// The product `λR` as it appears inside exponents.
    pub fn lr(&self) -> f64 {
        self.inputs.lambda * self.inputs.r * self.inputs.exponent_scale
    }
    /// `log α₁ = −e^{7λR}`.
    pub fn alpha1_log(&self) -> f64 {
        -(7.0 * self.lr()).exp()
    }
    /// `log α₂ = −e^{23λR}`.
    pub fn alpha2_log(&self) -> f64 {
        -(23.0 * self.lr()).exp()
    }
    /// `e^{−20λR}`.
    pub fn omega_margin(&self) -> f64 {
        (-20.0 * self.lr()).exp()
    }
    /// `e^{20λR}`.
    pub fn omega_cap(&self) -> f64 {
        (20.0 * self.lr()).exp()
    }
    /// `e^{−22λR}`, the ratio tolerance for nearby coordinates.
    pub fn ratio_tolerance(&self) -> f64 {
        (-22.0 * self.lr()).exp()
    }
    /// `log ρ′ = −e^{−21λR}`.
    pub fn rho_prime_log(&self) -> f64 {
        -(-21.0 * self.lr()).exp()
    }
}

/// Two-sided bound on `dist(0, ∂Π_x)`: `[−log‖x‖₁/λ*, −log‖x‖₁]`.
pub fn base_distance_bounds(field: &LinearVectorField, x: &AmbientPoint) -> (f64, f64) {
    let l = x.norm1_log();
    (-l / field.lambda_star(), -l)
}
