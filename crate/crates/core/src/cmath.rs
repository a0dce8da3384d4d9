//! Small complex-arithmetic helpers that keep precision near zero.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// `e^z - 1` without cancellation for small `z`.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * c - 2.0 * half * half;
    let im = z.re.exp() * s;
    Complex64::new(re, im)
}

/// Principal `log(1 + z)` without cancellation for small `z`.
pub fn clog1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// Reduce an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce an angle difference to `(-π, π]`.
pub fn wrap_signed(a: f64) -> f64 {
    let r = wrap_angle(a + PI) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// `log(Σ e^{v_i})`, ignoring `-∞` entries; `-∞` for an empty input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_matches_direct_for_moderate_values() {
        let z = Complex64::new(0.3, -1.2);
        let d = z.exp() - 1.0;
        assert!((cexpm1(z) - d).norm() < 1e-15);
    }

    #[test]
    fn expm1_keeps_tiny_arguments() {
        let z = Complex64::new(1e-20, 3e-20);
        let e = cexpm1(z);
        assert!((e - z).norm() < 1e-35);
    }

    #[test]
    fn log1p_inverts_expm1() {
        for &(a, b) in &[(1e-12, 2e-13), (0.4, -0.9), (-2.0, 3.0)] {
            let z = Complex64::new(a, b);
            let back = clog1p(cexpm1(z));
            assert!((back - z).norm() < 1e-14 * (1.0 + z.norm()), "{z}");
        }
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(-0.0), 0.0);
        assert!((wrap_angle(-1.0) - (TAU - 1.0)).abs() < 1e-15);
        assert!((wrap_signed(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_signed(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn lse() {
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp([0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp([-1e6, -1e6 + 1.0]) - (-1e6 + (1.0 + 1f64.exp()).ln())).abs() < 1e-9);
    }
}
