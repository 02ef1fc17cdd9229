use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{outage_probability, DetectionConstant};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, log_breaks};
use crate::sinr::moments::sum_blocks;
use crate::sinr::{e2e_ccdf, recoverable, Block, EndToEndParams, EvalContext, Evaluated, ExpTerm, Fallback, HopFactor};

/// Natural-log pieces of `E[ln(1+ϖγ)]`: `∫ln(1+ϖγ)[f₁ - f₁F₂ + f₂(1-F₁)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityTerms {
    pub density: f64,
    pub density_cdf: f64,
    pub survival_pdf: f64,
    pub error: f64,
}

impl CapacityTerms {
    /// In bits/s/Hz.
    pub fn total(&self) -> f64 {
        (self.density - self.density_cdf + self.survival_pdf) / LN_2
    }
}

pub fn capacity_terms(det: DetectionConstant, p: &EndToEndParams, ctx: &EvalContext) -> Result<CapacityTerms> {
    let tab = p.table()?;
    let varpi = det.varpi;
    let block = |hop| {
        move |e: &ExpTerm| Block {
            power: e.power as f64,
            decay: e.rate,
            rate: e.rate,
            shift: e.shift,
            log: Some(varpi),
            hop,
        }
    };
    let (density, e1) = sum_blocks(&tab.density, tab.beta, p, ctx, block(HopFactor::One))?;
    let (density_cdf, e2) = sum_blocks(&tab.density, tab.beta, p, ctx, block(HopFactor::Cdf))?;
    let (survival_pdf, e3) = sum_blocks(&tab.survival, tab.beta, p, ctx, block(HopFactor::Pdf))?;
    Ok(CapacityTerms {
        density,
        density_cdf,
        survival_pdf,
        error: (e1 + e2 + e3) / LN_2,
    })
}

/// `(1/ln 2) ∫ ϖ/(1+ϖγ) (1-F₁)(1-F₂) dγ`.
pub fn ergodic_capacity_semi_analytic(det: DetectionConstant, p: &EndToEndParams) -> Result<f64> {
    let w = det.varpi;
    let failure = std::cell::RefCell::new(None);
    let f = |g: f64| match e2e_ccdf(g, p) {
        Ok(c) => w / (1.0 + w * g) * c,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let scale = p.rf().avg_snr.max(p.fso().lambda()).max(1.0);
    let est = integrate_half_line(f, &log_breaks(1e-6, 1e2 * scale, 2), 1e-9, 1e-13)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est.value / LN_2)
}

/// Ergodic capacity in bits/s/Hz; a failed trivariate evaluation falls back
/// to the semi-analytic integral when the context allows it.
pub fn ergodic_capacity(det: DetectionConstant, p: &EndToEndParams, ctx: &EvalContext) -> Result<Evaluated> {
    match capacity_terms(det, p, ctx) {
        Ok(t) => {
            let v = t.total();
            if v < -t.error - 1e-9 {
                return Err(Error::Consistency(format!("negative ergodic capacity {v}")));
            }
            Ok(Evaluated {
                value: v.max(0.0),
                error: t.error,
                semi_analytic: false,
            })
        }
        Err(e) if recoverable(&e) && ctx.fallback == Fallback::Allow => Ok(Evaluated {
            value: ergodic_capacity_semi_analytic(det, p)?,
            error: 0.0,
            semi_analytic: true,
        }),
        Err(e) => Err(e),
    }
}

/// `Pr(log₂(1+ϖγ) < C_T)`.
pub fn outage_capacity(target: f64, det: DetectionConstant, p: &EndToEndParams) -> Result<f64> {
    if !(target >= 0.0) {
        return Err(Error::Domain(format!("target rate must be nonnegative, got {target}")));
    }
    outage_probability((target.exp2() - 1.0) / det.varpi, p)
}
