//! End-to-end SINR statistics of the min-form approximation.

pub mod blocks;
pub mod effective;
pub mod moments;

use std::sync::OnceLock;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::channel::fso::{fso_snr_ccdf, fso_snr_cdf, fso_snr_pdf, FsoLinkParams};
use crate::channel::interference::InterferenceParams;
use crate::channel::rf::RfLinkParams;
use crate::error::{Error, Result};
use crate::specfun::foxh::EvalOptions;
use crate::Scalar;

pub use blocks::{Block, BlockValue, HopFactor};
pub use effective::{CoefficientTable, ExpTerm};
pub use moments::{
    amount_of_fading, e2e_mgf, e2e_mgf_quadrature, e2e_moment, e2e_moment_quadrature, e2e_moment_terms, MomentTerms,
};

/// `γ₁γ₂ / (γ₁ + γ₂ + γ₂γ_R + γ_R + 1)`.
pub fn e2e_sinr_exact<T: Scalar>(g1: T, g2: T, gr: T) -> T {
    g1 * g2 / (g1 + g2 + g2 * gr + gr + T::one())
}

/// `min(γ₁/(γ_R + 1), γ₂)`.
pub fn e2e_sinr_approx<T: Scalar>(g1: T, g2: T, gr: T) -> T {
    (g1 / (gr + T::one())).min(g2)
}

/// Scenario parameters for the closed forms, with a lazily built
/// [`CoefficientTable`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EndToEndParams {
    rf: RfLinkParams,
    interference: InterferenceParams,
    fso: FsoLinkParams,
    #[serde(skip)]
    table: OnceLock<CoefficientTable>,
}

impl PartialEq for EndToEndParams {
    fn eq(&self, other: &Self) -> bool {
        self.rf == other.rf && self.interference == other.interference && self.fso == other.fso
    }
}

impl EndToEndParams {
    pub fn new(rf: RfLinkParams, interference: InterferenceParams, fso: FsoLinkParams) -> Result<Self> {
        rf.validate()?;
        interference.validate()?;
        fso.validate()?;
        Ok(Self {
            rf,
            interference,
            fso,
            table: OnceLock::new(),
        })
    }

    pub fn rf(&self) -> &RfLinkParams {
        &self.rf
    }

    pub fn interference(&self) -> &InterferenceParams {
        &self.interference
    }

    pub fn fso(&self) -> &FsoLinkParams {
        &self.fso
    }

    pub fn table(&self) -> Result<&CoefficientTable> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let t = CoefficientTable::new(&self.rf, &self.interference)?;
        let _ = self.table.set(t);
        Ok(self.table.get().expect("just set"))
    }
}

/// What to do when a multivariate H-function evaluation fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    Allow,
    Forbid,
}

/// Accuracy, cost and cancellation controls for closed-form evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext {
    pub bivariate: EvalOptions,
    pub trivariate: EvalOptions,
    pub fallback: Fallback,
    pub deadline: Option<Instant>,
}

impl Default for EvalContext {
    fn default() -> Self {
        Self {
            bivariate: EvalOptions {
                tolerance: 1e-7,
                budget: 4_000_000,
                max_refine: 3,
            },
            trivariate: EvalOptions {
                tolerance: 1e-4,
                budget: 6_000_000,
                max_refine: 2,
            },
            fallback: Fallback::Allow,
            deadline: None,
        }
    }
}

impl EvalContext {
    pub(crate) fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(Error::Cancelled),
            _ => Ok(()),
        }
    }

    pub(crate) fn options_for(&self, dims: usize) -> EvalOptions {
        if dims >= 3 {
            self.trivariate
        } else {
            self.bivariate
        }
    }
}

/// A closed-form result, flagged when the quadrature fallback produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub value: f64,
    pub error: f64,
    pub semi_analytic: bool,
}

/// Whether a failure of the analytic path may be replaced by quadrature.
pub(crate) fn recoverable(e: &Error) -> bool {
    matches!(e, Error::CostGuard { .. } | Error::Convergence { .. } | Error::Contour(_))
}

pub fn effective_snr_cdf(g: f64, p: &EndToEndParams) -> Result<f64> {
    Ok(p.table()?.cdf(g))
}

pub fn effective_snr_pdf(g: f64, p: &EndToEndParams) -> Result<f64> {
    Ok(p.table()?.pdf(g))
}

/// CDF of `min(γ_eff, γ₂)`: `F₁ + F₂ - F₁F₂`.
pub fn e2e_cdf(g: f64, p: &EndToEndParams) -> Result<f64> {
    if g <= 0.0 {
        return Ok(0.0);
    }
    let f1 = effective_snr_cdf(g, p)?;
    let f2 = fso_snr_cdf(g, p.fso())?;
    Ok((f1 + f2 - f1 * f2).clamp(0.0, 1.0))
}

/// `1 - F(γ) = (1 - F₁)(1 - F₂)` without cancellation.
pub fn e2e_ccdf(g: f64, p: &EndToEndParams) -> Result<f64> {
    if g <= 0.0 {
        return Ok(1.0);
    }
    let s1 = p.table()?.survival(g).clamp(0.0, 1.0);
    if s1 == 0.0 {
        return Ok(0.0);
    }
    Ok(s1 * fso_snr_ccdf(g, p.fso())?)
}

/// `f₁(1 - F₂) + f₂(1 - F₁)`.
pub fn e2e_pdf(g: f64, p: &EndToEndParams) -> Result<f64> {
    if g <= 0.0 {
        return Ok(0.0);
    }
    let t = p.table()?;
    let f1 = t.pdf(g);
    let f2 = fso_snr_pdf(g, p.fso())?;
    let s1 = 1.0 - t.cdf(g);
    let s2 = fso_snr_ccdf(g, p.fso())?;
    Ok((f1 * s2 + f2 * s1).max(0.0))
}
