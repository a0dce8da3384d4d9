//! Hyperbolic geometry (curvature −1) of the unit disc and of the leaf domains
//! `Π_x`: density and distance bounds for any `k`, closed forms and covering
//! maps for the three two-constraint shapes, and the leafwise coefficient `η̂`.

use crate::cmath::{cexpm1, clog1p, log_sum_exp};
use crate::linear_model::{AmbientPoint, LeafChart, LinearVectorField, ModelError, Shape2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperbolicError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no closed-form shape for a chart in dimension {0}")]
    ShapeUnavailable(usize),
    #[error("point {0} lies outside the unit disc")]
    OutsideDisc(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    ClosedForm,
    TwoSided,
}

/// An enclosure `[lo, hi]` of a metric quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricBound {
    pub lo: f64,
    pub hi: f64,
    pub kind: BoundKind,
}

impl MetricBound {
    pub fn closed(v: f64) -> Self {
        Self { lo: v, hi: v, kind: BoundKind::ClosedForm }
    }

    pub fn two_sided(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "{lo} > {hi}");
        Self { lo, hi, kind: BoundKind::TwoSided }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `lo − tol ≤ v ≤ hi + tol`, with `tol` relative to `max(1, |v|)`.
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        let t = tol * v.abs().max(1.0);
        self.lo - t <= v && v <= self.hi + t
    }
}

/// Poincaré distance in the unit disc with density `2/(1−|ξ|²)`.
pub fn disc_distance(xi: Complex64, zeta: Complex64) -> f64 {
    let num = (xi - zeta).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - xi.conj() * zeta).norm();
    2.0 * (num / den).min(1.0).atanh()
}

/// Euclidean radius of the hyperbolic disc `𝔻_R` centred at 0.
pub fn disc_radius(r: f64) -> f64 {
    (0.5 * r).tanh()
}

/// Hyperbolic radius of a Euclidean radius `s < 1`.
pub fn disc_hyperbolic_radius(s: f64) -> f64 {
    2.0 * s.atanh()
}

/// Density `λ_Π(a) ∈ [1/d, 2/d]`.
pub fn density_bounds(chart: &LeafChart, a: Complex64) -> Result<MetricBound, HyperbolicError> {
    let d = chart.boundary_distance(a)?;
    Ok(MetricBound::two_sided(1.0 / d, 2.0 / d))
}

/// Half-plane density at distance `y` from the boundary.
pub fn halfplane_density(y: f64) -> f64 {
    1.0 / y
}

/// Density of a strip of width `w` at distance `y` from one side.
pub fn strip_density(w: f64, y: f64) -> f64 {
    (PI / w) / (PI * y / w).sin()
}

/// Density of a wedge of opening `theta0` at polar position `(r, phi)` from the
/// vertex, `phi` measured from one side.
pub fn wedge_density(theta0: f64, r: f64, phi: f64) -> f64 {
    (PI / theta0) / (r * (PI * phi / theta0).sin())
}

fn shape_of(chart: &LeafChart) -> Result<Shape2, HyperbolicError> {
    chart.shape2().ok_or(HyperbolicError::ShapeUnavailable(chart.k()))
}

/// Exact density for charts with a closed-form shape.
pub fn exact_density(chart: &LeafChart, a: Complex64) -> Result<MetricBound, HyperbolicError> {
    let shape = shape_of(chart)?;
    chart.boundary_distance(a)?;
    let v = match shape {
        Shape2::HalfPlane { distance, normal } => halfplane_density(distance - (normal.conj() * a).re),
        Shape2::Strip { width, offset, normal } => strip_density(width, offset - (normal.conj() * a).re),
        Shape2::Wedge { vertex, opening_angle, orientation } => {
            let s = (a - vertex) * Complex64::from_polar(1.0, -orientation);
            let phi = s.im.atan2(s.re);
            let phi = if phi < 0.0 { phi + TAU } else { phi };
            wedge_density(opening_angle, s.norm(), phi)
        }
    };
    Ok(MetricBound::closed(v))
}

/// Exact distance in the half-plane `{y > 0}` between points at heights
/// `ya`, `yb` and Euclidean separation `sep`.
pub fn halfplane_distance(ya: f64, yb: f64, sep: f64) -> f64 {
    2.0 * (sep / (2.0 * (ya * yb).sqrt())).asinh()
}

/// Two-sided bounds on `dist_Π(a, b)`, always computed by comparison.
///
/// The lower end is the largest exact distance in a supporting half-plane, the
/// upper end integrates `2/d` along `[a, b]` with adaptive Simpson, widened by
/// the quadrature error estimate.
pub fn domain_distance_two_sided(chart: &LeafChart, a: Complex64, b: Complex64) -> Result<MetricBound, HyperbolicError> {
    chart.boundary_distance(a)?;
    chart.boundary_distance(b)?;
    let sep = (a - b).norm();
    if sep == 0.0 {
        return Ok(MetricBound::two_sided(0.0, 0.0));
    }
    let lo = chart
        .constraints()
        .iter()
        .map(|c| halfplane_distance(c.signed_distance(a), c.signed_distance(b), sep))
        .fold(0.0, f64::max);
    let f = |s: f64| 2.0 / chart.signed_boundary_distance(a + (b - a) * s) * sep;
    let (val, err) = adaptive_simpson(&f, 0.0, 1.0, 1e-12 * (1.0 + lo), 40);
    let hi = (val + 2.0 * err.abs() + 4.0 * f64::EPSILON * val).max(lo);
    Ok(MetricBound::two_sided(lo, hi))
}

/// `dist_Π(a, b)`: closed form through the covering map when the chart has a
/// two-constraint shape, otherwise the two-sided enclosure.
pub fn domain_distance_bounds(chart: &LeafChart, a: Complex64, b: Complex64) -> Result<MetricBound, HyperbolicError> {
    match chart.shape2() {
        Some(_) => {
            chart.boundary_distance(a)?;
            chart.boundary_distance(b)?;
            let map = CoveringMap2D::new(chart)?;
            Ok(MetricBound::closed(disc_distance(map.inverse(a), map.inverse(b))))
        }
        None => domain_distance_two_sided(chart, a, b),
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

/// Returns the integral and an error estimate.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (l, el) = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (r, er) = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (l + r, el + er)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chain {
    /// `τ(ξ) = 2dξ/(1 + n̄ξ)`.
    HalfPlane { d: f64, normal: Complex64 },
    /// `ζ = n·i·w·Δ/π`.
    Strip { normal: Complex64, width: f64 },
    /// `ζ = −V·expm1(θ₀Δ/π)`.
    Wedge { vertex: Complex64, theta0: f64 },
}

/// Biholomorphic `τ: 𝔻 → Π_x` with `τ(0) = 0` and `τ'(0) > 0`.
///
/// Strips and wedges go through the upper half-plane: with `W = W₀(1 + E)`
/// and `|W₀| = 1`, the disc coordinate is `η = E/(E + c)`,
/// `c = 2i·sin β·e^{−iβ}` for `W₀ = e^{iβ}`, and `Δ = log(1 + E)` is the
/// (rescaled) logarithmic coordinate of the shape. Everything is expressed in
/// `E` and `Δ` so that points near the base point keep full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringMap2D {
    chain: Chain,
    c: Complex64,
    rotation: Complex64,
}

impl CoveringMap2D {
    pub fn new(chart: &LeafChart) -> Result<Self, HyperbolicError> {
        let shape = shape_of(chart)?;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        Ok(match shape {
            Shape2::HalfPlane { distance, normal } => {
                Self { chain: Chain::HalfPlane { d: distance, normal }, c: one, rotation: one }
            }
            Shape2::Strip { width, offset, normal } => {
                let beta = PI * offset / width;
                let c = 2.0 * i * beta.sin() * Complex64::from_polar(1.0, -beta);
                let g0 = normal * i * width / PI;
                let rot = (c * g0).conj() / (c * g0).norm();
                Self { chain: Chain::Strip { normal, width }, c, rotation: rot }
            }
            Shape2::Wedge { vertex, opening_angle, orientation } => {
                let s0 = -vertex * Complex64::from_polar(1.0, -orientation);
                let beta = s0.arg().rem_euclid(TAU) * PI / opening_angle;
                let c = 2.0 * i * beta.sin() * Complex64::from_polar(1.0, -beta);
                let g0 = -vertex * opening_angle / PI;
                let rot = (c * g0).conj() / (c * g0).norm();
                Self { chain: Chain::Wedge { vertex, theta0: opening_angle }, c, rotation: rot }
            }
        })
    }

    /// `τ(ξ)`.
    pub fn eval(&self, xi: Complex64) -> Complex64 {
        match self.chain {
            Chain::HalfPlane { d, normal } => 2.0 * d * xi / (1.0 + normal.conj() * xi),
            _ => {
                let eta = self.rotation * xi;
                let e = eta * self.c / (1.0 - eta);
                self.zeta_of_log(clog1p(e))
            }
        }
    }

    fn zeta_of_log(&self, delta: Complex64) -> Complex64 {
        match self.chain {
            Chain::Strip { normal, width } => normal * Complex64::i() * width * delta / PI,
            Chain::Wedge { vertex, theta0 } => -vertex * cexpm1(delta * theta0 / PI),
            Chain::HalfPlane { .. } => unreachable!(),
        }
    }

    /// `τ⁻¹(ζ)` for `ζ ∈ Π_x`.
    pub fn inverse(&self, zeta: Complex64) -> Complex64 {
        match self.chain {
            Chain::HalfPlane { d, normal } => zeta / (2.0 * d - normal.conj() * zeta),
            Chain::Strip { normal, width } => {
                let delta = -Complex64::i() * PI * zeta * normal.conj() / width;
                self.xi_of_e(cexpm1(delta))
            }
            Chain::Wedge { vertex, theta0 } => {
                let delta = clog1p(-zeta / vertex) * (PI / theta0);
                self.xi_of_e(cexpm1(delta))
            }
        }
    }

    fn xi_of_e(&self, e: Complex64) -> Complex64 {
        self.rotation.conj() * e / (e + self.c)
    }

    /// `τ'(ξ)`.
    pub fn derivative(&self, xi: Complex64) -> Complex64 {
        match self.chain {
            Chain::HalfPlane { d, normal } => {
                let q = 1.0 + normal.conj() * xi;
                2.0 * d / (q * q)
            }
            _ => {
                let eta = self.rotation * xi;
                let one_m = 1.0 - eta;
                let e = eta * self.c / one_m;
                let de = self.c / (one_m * one_m);
                let delta = clog1p(e);
                let dd = 1.0 / (1.0 + e);
                let dz = match self.chain {
                    Chain::Strip { normal, width } => normal * Complex64::i() * width / PI,
                    Chain::Wedge { vertex, theta0 } => -vertex * (theta0 / PI) * (delta * theta0 / PI).exp(),
                    Chain::HalfPlane { .. } => unreachable!(),
                };
                self.rotation * de * dd * dz
            }
        }
    }
}

/// Log of `‖Dφ_x(0)‖ = ‖(λ_j x_j)_j‖₂`.
pub fn leaf_speed_log(field: &LinearVectorField, x: &AmbientPoint) -> f64 {
    0.5 * log_sum_exp(
        field.lambdas().iter().zip(x.coords()).map(|(l, c)| 2.0 * (l.norm().ln() + c.log_modulus())),
    )
}

/// `η̂(x) = ‖Dφ_x(0)‖ / λ_Π(0)`; closed form when `k ≤ 2`.
pub fn eta_hat(field: &LinearVectorField, x: &AmbientPoint) -> Result<MetricBound, HyperbolicError> {
    let chart = LeafChart::new(field, x)?;
    let speed = leaf_speed_log(field, x);
    let zero = Complex64::new(0.0, 0.0);
    if chart.shape2().is_some() {
        let dens = exact_density(&chart, zero)?.lo;
        Ok(MetricBound::closed((speed - dens.ln()).exp()))
    } else {
        let d = chart.boundary_distance(zero)?;
        Ok(MetricBound::two_sided((speed + (0.5 * d).ln()).exp(), (speed + d.ln()).exp()))
    }
}

/// The two-sided bound `[−‖x‖₁ log‖x‖₁ / (2λ*), −kλ*‖x‖₁ log‖x‖₁]`.
pub fn eta_reference_bounds(field: &LinearVectorField, x: &AmbientPoint) -> (f64, f64) {
    let l = x.norm1_log();
    let ls = field.lambda_star();
    let base = (l + (-l).ln()).exp();
    (base / (2.0 * ls), field.k() as f64 * ls * base)
}

/// Samples of the hyperbolic ball `{ζ : dist_Π(0, ζ) ≤ R}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSample {
    pub points: Vec<Complex64>,
    /// Candidates whose certified upper distance bound is `≤ R` (all returned points).
    pub conservative: usize,
    /// Candidates whose lower distance bound is `≤ R`.
    pub optimistic: usize,
    /// Candidates drawn.
    pub drawn: usize,
}

/// Uniform hyperbolic-area sample of `𝔻_R`, pushed into `Π_x` for closed-form
/// shapes; rejection sampling against the certified upper bound otherwise.
pub fn hyperbolic_ball_sample(chart: &LeafChart, r: f64, n: usize, seed: u64) -> Result<BallSample, HyperbolicError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n == 0 {
        return Ok(BallSample { points: vec![], conservative: 0, optimistic: 0, drawn: 0 });
    }
    if chart.shape2().is_some() {
        let map = CoveringMap2D::new(chart)?;
        let points: Vec<Complex64> = (0..n).map(|_| map.eval(uniform_disc_point(&mut rng, r))).collect();
        return Ok(BallSample { points, conservative: n, optimistic: n, drawn: n });
    }
    let zero = Complex64::new(0.0, 0.0);
    let d0 = chart.boundary_distance(zero)?;
    let reach = d0 * r.exp_m1();
    let mut points = Vec::with_capacity(n);
    let (mut optimistic, mut drawn) = (0, 0);
    let max_draws = 1000 * n.max(100);
    while points.len() < n {
        if drawn >= max_draws {
            return Err(HyperbolicError::ShapeUnavailable(chart.k()));
        }
        drawn += 1;
        let z = Complex64::from_polar(reach * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
        if !chart.contains(z) {
            continue;
        }
        let b = domain_distance_two_sided(chart, zero, z)?;
        if b.lo <= r {
            optimistic += 1;
        }
        if b.hi <= r {
            points.push(z);
        }
    }
    Ok(BallSample { conservative: points.len(), points, optimistic, drawn })
}

/// A point of `𝔻_R` drawn uniformly for hyperbolic area.
pub fn uniform_disc_point(rng: &mut impl Rng, r: f64) -> Complex64 {
    let u: f64 = rng.gen();
    let rho = (1.0 + u * (r.cosh() - 1.0)).acosh();
    Complex64::from_polar(disc_radius(rho), TAU * rng.gen::<f64>())
}
