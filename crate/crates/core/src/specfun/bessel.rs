//! Bessel functions needed by the channel models: `J₀` for the Jakes
//! correlation and `I_ν` for the bivariate Nakagami joint density.

use std::f64::consts::PI;

use super::gamma::ln_gamma;
use crate::error::{Error, Result};

/// A positive value stored as `mantissa · e^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: f64,
}

impl Scaled {
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.exponent
    }

    /// Plain value; `+∞` when it does not fit in an `f64`.
    pub fn value(&self) -> f64 {
        self.mantissa * self.exponent.exp()
    }
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j0 of non-finite {x}")));
    }
    Ok(libm::j0(x))
}

/// Modified Bessel function of the first kind `I_ν(x)`, `ν ≥ 0`, `x ≥ 0`.
///
/// Past `x = 700` the result is returned in scaled form with `exponent = x`
/// so the caller can stay in log space.
pub fn bessel_i(nu: f64, x: f64) -> Result<Scaled> {
    if !(nu >= 0.0) || !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_i requires ν ≥ 0, x ≥ 0 (got ν={nu}, x={x})")));
    }
    let scaled = bessel_i_scaled(nu, x);
    if x <= 700.0 {
        Ok(Scaled {
            mantissa: scaled * x.exp(),
            exponent: 0.0,
        })
    } else {
        Ok(Scaled {
            mantissa: scaled,
            exponent: x,
        })
    }
}

/// `e^{-x} I_ν(x)`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= 30.0 || x < nu * nu {
        series_scaled(nu, x)
    } else {
        asymptotic_scaled(nu, x)
    }
}

fn series_scaled(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    // log of leading term, with the e^{-x} scaling folded in
    let ln_t0 = nu * half.ln() - ln_gamma(nu + 1.0) - x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    // terms grow until k ≈ x/2 then decay; rescale to avoid overflow
    let mut ln_scale = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if sum > 1e250 {
            ln_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
        if term < sum * 1e-17 && k > half {
            break;
        }
    }
    (ln_t0 + ln_scale + sum.ln()).exp()
}

fn asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (kf * 8.0 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}
