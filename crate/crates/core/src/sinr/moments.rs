//! Moments, amount of fading and moment generating function.

use serde::{Deserialize, Serialize};

use super::blocks::{Block, HopFactor};
use super::{e2e_ccdf, recoverable, EndToEndParams, EvalContext, Evaluated, ExpTerm, Fallback};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, log_breaks};

/// `E[γ^ν] = I₁ + I₂ - I₃ - I₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTerms {
    /// `∫γ^ν f₁`.
    pub i1: f64,
    /// `∫γ^ν f₂`.
    pub i2: f64,
    /// `∫γ^ν f₁ F₂`.
    pub i3: f64,
    /// `∫γ^ν f₂ F₁`.
    pub i4: f64,
    /// Accumulated absolute error estimate.
    pub error: f64,
}

impl MomentTerms {
    pub fn total(&self) -> f64 {
        self.i1 + self.i2 - self.i3 - self.i4
    }
}

/// `Σ weight · block(term)` over expansion terms.
pub(crate) fn sum_blocks(
    terms: &[ExpTerm],
    beta: f64,
    p: &EndToEndParams,
    ctx: &EvalContext,
    make: impl Fn(&ExpTerm) -> Block,
) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut error = 0.0;
    for t in terms {
        ctx.check_deadline()?;
        let blk = make(t);
        let dims = (blk.shift > 0) as usize + blk.log.is_some() as usize + (blk.hop != HopFactor::One) as usize;
        let v = blk.evaluate(beta, p.fso(), ctx.options_for(dims))?;
        value += t.weight * v.value;
        error += t.weight.abs() * v.error;
    }
    Ok((value, error))
}

pub fn e2e_moment_terms(nu: u32, p: &EndToEndParams, ctx: &EvalContext) -> Result<MomentTerms> {
    if nu == 0 {
        return Err(Error::Domain("moment order must be a positive integer".into()));
    }
    let t = p.table()?;
    let nu_f = nu as f64;
    let beta = t.beta;
    let dens = |hop| {
        move |e: &ExpTerm| Block {
            power: nu_f + e.power as f64,
            decay: e.rate,
            rate: e.rate,
            shift: e.shift,
            log: None,
            hop,
        }
    };
    let (i1, e1) = sum_blocks(&t.density, beta, p, ctx, dens(HopFactor::One))?;
    let i2 = p.fso().moment(nu_f)?;
    let (i3, e3) = sum_blocks(&t.density, beta, p, ctx, dens(HopFactor::Cdf))?;
    let (j4, e4) = sum_blocks(&t.survival, beta, p, ctx, |e| Block {
        power: nu_f + e.power as f64,
        decay: e.rate,
        rate: e.rate,
        shift: e.shift,
        log: None,
        hop: HopFactor::Pdf,
    })?;
    Ok(MomentTerms {
        i1,
        i2,
        i3,
        i4: i2 - j4,
        error: e1 + e3 + e4 + 1e-14 * i2.abs(),
    })
}

/// `∫₀^∞ ν γ^{ν-1} (1 - F(γ)) dγ` with the closed per-hop CDFs.
pub fn e2e_moment_quadrature(nu: u32, p: &EndToEndParams) -> Result<f64> {
    let nu_f = nu as f64;
    let failure = std::cell::RefCell::new(None);
    let f = |g: f64| match e2e_ccdf(g, p) {
        Ok(c) => nu_f * g.powf(nu_f - 1.0) * c,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let scale = p.rf().avg_snr.max(p.fso().lambda()).max(1e-3);
    let est = integrate_half_line(f, &log_breaks(1e-8 * scale, 1e3 * scale, 3), 1e-9, 0.0)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est.value)
}

/// `E[γ^ν]`, analytic with a flagged quadrature fallback.
pub fn e2e_moment(nu: u32, p: &EndToEndParams, ctx: &EvalContext) -> Result<Evaluated> {
    match e2e_moment_terms(nu, p, ctx) {
        Ok(t) => Ok(Evaluated {
            value: t.total(),
            error: t.error,
            semi_analytic: false,
        }),
        Err(e) if recoverable(&e) && ctx.fallback == Fallback::Allow => Ok(Evaluated {
            value: e2e_moment_quadrature(nu, p)?,
            error: 0.0,
            semi_analytic: true,
        }),
        Err(e) => Err(e),
    }
}

/// `E[γ^ν]/E[γ]^ν - 1`.
pub fn amount_of_fading(nu: u32, p: &EndToEndParams, ctx: &EvalContext) -> Result<f64> {
    if nu == 1 {
        return Ok(0.0);
    }
    let m1 = e2e_moment(1, p, ctx)?.value;
    let mn = e2e_moment(nu, p, ctx)?.value;
    Ok(mn / m1.powi(nu as i32) - 1.0)
}

/// `M(t) = E[e^{tγ}]` for `t ≤ 0`, as `J₁ + J₂ - J₃` with
/// `J₁ = -t∫e^{tγ}F₁`, `J₂ = -t∫e^{tγ}F₂`, `J₃ = -t∫e^{tγ}F₁F₂`.
pub fn e2e_mgf(t: f64, p: &EndToEndParams, ctx: &EvalContext) -> Result<Evaluated> {
    if t > 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!(
            "MGF is evaluated on t ≤ 0 only (Laplace transform M(-s)); got t = {t}"
        )));
    }
    if t == 0.0 {
        return Ok(Evaluated {
            value: 1.0,
            error: 0.0,
            semi_analytic: false,
        });
    }
    let s = -t;
    let analytic = || -> Result<(f64, f64)> {
        let tab = p.table()?;
        let beta = tab.beta;
        let shifted = |hop| {
            move |e: &ExpTerm| Block {
                power: e.power as f64,
                decay: e.rate + s,
                rate: e.rate,
                shift: e.shift,
                log: None,
                hop,
            }
        };
        let (tri, _) = sum_blocks(&tab.survival, beta, p, ctx, shifted(HopFactor::One))?;
        let (bf2, err) = sum_blocks(&tab.survival, beta, p, ctx, shifted(HopFactor::Cdf))?;
        let j2 = Block {
            power: 0.0,
            decay: s,
            rate: 1.0,
            shift: 0,
            log: None,
            hop: HopFactor::Pdf,
        }
        .evaluate(beta, p.fso(), ctx.bivariate)?;
        let j1 = 1.0 - s * tri;
        let j3 = j2.value - s * bf2;
        Ok((j1 + j2.value - j3, s * err + j2.error))
    };
    match analytic() {
        Ok((value, error)) => Ok(Evaluated {
            value,
            error,
            semi_analytic: false,
        }),
        Err(e) if recoverable(&e) && ctx.fallback == Fallback::Allow => Ok(Evaluated {
            value: e2e_mgf_quadrature(t, p)?,
            error: 0.0,
            semi_analytic: true,
        }),
        Err(e) => Err(e),
    }
}

/// `1 + t∫e^{tγ}(1 - F(γ))dγ` by adaptive quadrature.
pub fn e2e_mgf_quadrature(t: f64, p: &EndToEndParams) -> Result<f64> {
    let s = -t;
    let failure = std::cell::RefCell::new(None);
    let f = |g: f64| match e2e_ccdf(g, p) {
        Ok(c) => (-s * g).exp() * c,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let hi = 60.0 / s;
    let est = integrate_half_line(f, &log_breaks(1e-9 * hi, hi, 3), 1e-10, 0.0)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(1.0 - s * est.value)
}
