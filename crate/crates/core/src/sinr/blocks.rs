//! The integral `∫₀^∞ γ^e e^{-Pγ} (Rγ + β)^{-d} [ln(1 + ϖγ)] G(γ) dγ` with
//! `G ∈ {1, F₂, f₂}`, shared by the moment, MGF, BER and capacity forms.
//!
//! Each non-trivial factor contributes one Mellin–Barnes variable and the
//! γ-integral leaves a single joint gamma factor, giving an H-function of
//! up to three variables.

use crate::channel::fso::FsoLinkParams;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_half_line, log_breaks};
use crate::specfun::foxh::{fox_h, EvalOptions, FoxHSpec, FoxHVariable, HParam, JointFactor};
use crate::specfun::gamma::ln_gamma;
use crate::specfun::tricomi::tricomi_u;

/// Optical-hop factor `G(γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopFactor {
    One,
    Cdf,
    Pdf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub power: f64,
    pub decay: f64,
    pub rate: f64,
    pub shift: u32,
    /// ϖ when the logarithm is present.
    pub log: Option<f64>,
    pub hop: HopFactor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockValue {
    pub value: f64,
    pub error: f64,
    /// Number of Mellin–Barnes variables used (0 for closed forms).
    pub dims: usize,
}

impl Block {
    fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.rate > 0.0) {
            return Err(Error::Domain("block needs positive decay and rate".into()));
        }
        if self.power <= -1.0 && self.hop != HopFactor::Cdf {
            return Err(Error::Domain(format!("∫γ^{} diverges at the origin", self.power)));
        }
        Ok(())
    }

    /// Build the H-function specification and the log of its prefactor.
    pub fn spec(&self, beta: f64, fso: &FsoLinkParams) -> Result<Option<(FoxHSpec, f64)>> {
        self.validate()?;
        let eps = if self.hop == HopFactor::Pdf { 1.0 } else { 0.0 };
        let e1 = self.power + 1.0 - eps;
        let mut variables = Vec::new();
        let mut coeffs = Vec::new();
        let mut ln_c = -e1 * self.decay.ln();
        if self.shift > 0 {
            let d = self.shift as f64;
            variables.push(FoxHVariable {
                a: vec![HParam::new(1.0, 1.0)?],
                n: 1,
                b: vec![HParam::new(d, 1.0)?],
                m: 1,
                argument: beta * self.decay / self.rate,
            });
            coeffs.push(1.0);
            ln_c += -d * beta.ln() - ln_gamma(d);
        }
        if let Some(varpi) = self.log {
            // ln(1 + x) = (1/2πi) ∫ Γ(s)² Γ(1 - s) / Γ(1 + s) x^s ds, 0 < Re s < 1
            variables.push(FoxHVariable {
                a: vec![HParam::new(0.0, 1.0)?, HParam::new(1.0, 1.0)?],
                n: 1,
                b: vec![HParam::new(0.0, 1.0)?, HParam::new(0.0, 1.0)?],
                m: 2,
                argument: self.decay / varpi,
            });
            coeffs.push(1.0);
        }
        if self.hop != HopFactor::One {
            let (mut b, den) = fso.h_params()?;
            let (a, n) = if self.hop == HopFactor::Cdf {
                b.push(HParam::new(0.0, 1.0)?);
                (vec![HParam::new(1.0, 1.0)?, den], 1)
            } else {
                (vec![den], 0)
            };
            variables.push(FoxHVariable {
                a,
                n,
                b,
                m: 3,
                argument: 1.0 / (fso.lambda() * self.decay),
            });
            coeffs.push(-1.0);
            ln_c += fso.h_constant().ln();
        }
        if variables.is_empty() {
            return Ok(None);
        }
        Ok(Some((
            FoxHSpec {
                variables,
                joint: vec![JointFactor {
                    offset: e1,
                    coeffs,
                    numerator: true,
                }],
            },
            ln_c,
        )))
    }

    /// Closed form when no H-function variable beyond the binomial is needed.
    fn closed(&self, beta: f64) -> Result<f64> {
        let c = self.power + 1.0;
        let d = self.shift as f64;
        if self.shift == 0 {
            return Ok((ln_gamma(c) - c * self.decay.ln()).exp());
        }
        let b = beta / self.rate;
        let u = tricomi_u(c, c - d + 1.0, self.decay * b)?;
        Ok((ln_gamma(c) - d * self.rate.ln() + (c - d) * b.ln()).exp() * u)
    }

    pub fn evaluate(&self, beta: f64, fso: &FsoLinkParams, opts: EvalOptions) -> Result<BlockValue> {
        self.validate()?;
        if self.hop == HopFactor::One && self.log.is_none() {
            return Ok(BlockValue {
                value: self.closed(beta)?,
                error: 0.0,
                dims: 0,
            });
        }
        let (spec, ln_c) = self.spec(beta, fso)?.expect("non-trivial block");
        let h = fox_h(&spec, opts)?;
        let c = ln_c.exp();
        Ok(BlockValue {
            value: c * h.value,
            error: c * h.error,
            dims: spec.dims(),
        })
    }

    /// The defining integral by adaptive quadrature, with the optical factor
    /// supplied by the caller.
    pub fn quadrature(&self, beta: f64, hop: impl Fn(f64) -> Result<f64>, rel_tol: f64) -> Result<f64> {
        self.validate()?;
        let failure = std::cell::RefCell::new(None);
        let f = |g: f64| -> f64 {
            if g <= 0.0 {
                return 0.0;
            }
            let h = match self.hop {
                HopFactor::One => 1.0,
                _ => match hop(g) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        return 0.0;
                    }
                },
            };
            let lg = self.log.map_or(1.0, |w| (w * g).ln_1p());
            let ln = self.power * g.ln() - self.decay * g - self.shift as f64 * (self.rate * g + beta).ln();
            ln.exp() * lg * h
        };
        let hi = 120.0 / self.decay + 10.0 * self.power.max(0.0) / self.decay;
        let est = integrate_half_line(f, &log_breaks(1e-10 * hi, hi, 4), rel_tol, 0.0)?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(est.value)
    }
}
