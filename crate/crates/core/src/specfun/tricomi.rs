//! Tricomi confluent hypergeometric function `U(a, b, z)` for real arguments.

use super::gamma::ln_gamma;
use super::meijer::{meijer_g, MeijerGSpec};
use crate::error::{Error, Result};
use crate::quadrature::integrate_to_infinity;

/// `U(a, b, z)` for `z > 0`.
///
/// Uses the G-function representation when `a > 0` and `1 + a - b > 0`,
/// the Laplace integral when only `a > 0`, and Kummer's transformation
/// `U(a, b, z) = z^{1-b} U(1 + a - b, 2 - b, z)` when only `1 + a - b > 0`.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("U({a}, {b}, {z}) needs finite parameters and z > 0")));
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    let c = 1.0 + a - b;
    if a > 0.0 && c > 0.0 {
        let spec = MeijerGSpec::new(vec![1.0 - a], 1, vec![0.0, 1.0 - b], 2, z)?;
        let g = meijer_g(&spec, 1e-12)?;
        return Ok(g.value * (-(ln_gamma(a) + ln_gamma(c))).exp());
    }
    if a > 0.0 {
        return laplace_integral(a, b, z);
    }
    if c > 0.0 {
        return Ok(z.powf(1.0 - b) * tricomi_u(c, 2.0 - b, z)?);
    }
    Err(Error::Domain(format!("U({a}, {b}, z) with a ≤ 0 and 1 + a - b ≤ 0 is not supported")))
}

fn laplace_integral(a: f64, b: f64, z: f64) -> Result<f64> {
    let lg = ln_gamma(a);
    let f = |t: f64| {
        if t <= 0.0 {
            return if a > 1.0 { 0.0 } else if a == 1.0 { 1.0 } else { 0.0 };
        }
        ((a - 1.0) * t.ln() + (b - a - 1.0) * t.ln_1p() - z * t - lg).exp()
    };
    let scale = (a / z).max(1e-3);
    Ok(integrate_to_infinity(f, 0.0, scale, 1e-12, 0.0)?.value)
}
