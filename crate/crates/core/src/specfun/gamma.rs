//! Gamma-family helpers: complex log-gamma on the principal branch, a faster
//! variant for Mellin–Barnes kernels (correct modulo 2πi), and a few real
//! combinatorial helpers.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const STIRLING_MIN_ABS: f64 = 15.0;

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

fn shift_count(z: Complex64) -> usize {
    if z.im.abs() >= STIRLING_MIN_ABS {
        if z.re >= 0.0 {
            0
        } else {
            (-z.re).ceil() as usize
        }
    } else if z.re >= STIRLING_MIN_ABS {
        0
    } else {
        (STIRLING_MIN_ABS - z.re).ceil() as usize
    }
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal-branch `ln Γ(z)`: continuous on ℂ minus the non-positive real
/// axis and real for positive real `z`.
pub fn ln_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("ln_gamma of non-finite argument {z}")));
    }
    if is_pole(z) {
        return Err(Error::Domain(format!(
            "ln_gamma pole at non-positive integer {}",
            z.re
        )));
    }
    let n = shift_count(z);
    // Each principal log of z + k is analytic off the negative real axis, so the
    // sum is the analytic continuation of ln Γ in both half planes.
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        acc += (z + k as f64).ln();
    }
    Ok(stirling(z + n as f64) - acc)
}

/// `ln Γ(z)` modulo 2πi, for use inside integrands where only `exp` of the
/// sum matters. Poles return `+∞` real part so reciprocal factors vanish.
pub(crate) fn ln_gamma_kernel(z: Complex64) -> Complex64 {
    if is_pole(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re < -20.0 {
        // Reflection keeps the shift count bounded far to the left.
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_kernel(1.0 - z);
    }
    let n = shift_count(z);
    if n == 0 {
        return stirling(z);
    }
    let mut prod = Complex64::new(1.0, 0.0);
    for k in 0..n {
        prod *= z + k as f64;
    }
    stirling(z + n as f64) - prod.ln()
}

/// `ln sin(πz)` modulo 2πi without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if z.im > 0.0 {
        // sin(πz) = (i/2) e^{-iπz} (1 - e^{2πiz})
        -i * PI * z + (1.0 - (2.0 * PI * i * z).exp()).ln() + Complex64::new(0.5, 0.0).ln() + i * PI / 2.0
    } else if z.im < 0.0 {
        ln_sin_pi(z.conj()).conj()
    } else {
        let s = (PI * z.re).sin();
        Complex64::new(s.abs().ln(), if s < 0.0 { PI } else { 0.0 })
    }
}

/// Real `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Real `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Regularized lower incomplete gamma `P(k, x)` for integer `k ≥ 1`, stable
/// for small `x` where `1 - e^{-x} Σ x^l/l!` would cancel.
pub fn lower_regularized_int(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < f64::from(k) + 1.0 {
        // P = e^{-x} Σ_{l≥k} x^l / l!
        let mut term = (f64::from(k) * x.ln() - x - ln_gamma(f64::from(k) + 1.0)).exp();
        let mut sum = term;
        let mut l = f64::from(k);
        loop {
            l += 1.0;
            term *= x / l;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum
    } else {
        let mut term = (-x).exp();
        let mut sum = term;
        for l in 1..k {
            term *= x / f64::from(l);
            sum += term;
        }
        1.0 - sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ln_gamma_at_one_is_zero() {
        let v = ln_gamma_complex(c(1.0, 0.0)).unwrap();
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn ln_gamma_half_is_ln_sqrt_pi() {
        let v = ln_gamma_complex(c(0.5, 0.0)).unwrap();
        assert!((v.re - 0.5 * PI.ln()).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn ln_gamma_three_four_i_matches_mpmath() {
        // mpmath.loggamma(3+4j)
        let v = ln_gamma_complex(c(3.0, 4.0)).unwrap();
        let want = c(-1.756_626_784_603_784, 4.742_664_438_034_658);
        assert!((v - want).norm() / want.norm() < 1e-13, "{v}");
    }

    #[test]
    fn pole_is_rejected() {
        assert!(matches!(ln_gamma_complex(c(-3.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma_complex(c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn principal_branch_is_continuous_across_shift_boundary() {
        // Walk along a vertical line; the imaginary part must not jump by 2π.
        let mut prev = ln_gamma_complex(c(0.3, 0.0)).unwrap();
        for k in 1..400 {
            let z = c(0.3, k as f64 * 0.1);
            let v = ln_gamma_complex(z).unwrap();
            assert!((v - prev).norm() < 0.5, "jump at {z}");
            prev = v;
        }
    }

    #[test]
    fn kernel_agrees_modulo_two_pi() {
        for &(re, im) in &[(0.2, 0.7), (-3.5, 2.0), (-25.3, 1.1), (7.0, -40.0), (-0.5, 0.0)] {
            let z = c(re, im);
            let a = ln_gamma_kernel(z).exp();
            let b = ln_gamma_complex(z).unwrap().exp();
            assert!((a - b).norm() / b.norm() < 1e-12, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn recurrence_holds() {
        for &(re, im) in &[(0.1, 0.3), (2.5, -7.0), (-4.2, 0.9)] {
            let z = c(re, im);
            let lhs = ln_gamma_complex(z + 1.0).unwrap().exp();
            let rhs = z * ln_gamma_complex(z).unwrap().exp();
            assert!((lhs - rhs).norm() / rhs.norm() < 1e-12);
        }
    }

    #[test]
    fn incomplete_gamma_small_argument() {
        // P(3, 1.5) from scipy/mpmath
        assert!((lower_regularized_int(3, 1.5) - 0.191_153_169_461_941_87).abs() < 1e-15);
        // tiny x: P(2, x) ≈ x²/2
        let x = 1e-9;
        assert!((lower_regularized_int(2, x) / (x * x / 2.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(4, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(factorial(5), 120.0);
    }
}
