use serde::{Deserialize, Serialize};

use super::ModulationScheme;
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::sinr::moments::sum_blocks;
use crate::sinr::{e2e_cdf, recoverable, Block, EndToEndParams, EvalContext, Evaluated, ExpTerm, Fallback, HopFactor};
use crate::specfun::gamma::ln_gamma;

/// Which evaluation route [`average_ber`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerPath {
    #[default]
    Analytic,
    Quadrature,
}

fn prefactor(m: ModulationScheme) -> f64 {
    let (d, t) = (m.delta(), m.tau());
    0.5 * (t * d.ln() - ln_gamma(t)).exp()
}

fn check_range(v: f64, tol: f64) -> Result<f64> {
    if !(v > -tol && v < 0.5 + tol) {
        return Err(Error::Consistency(format!("average BER {v} outside [0, 1/2]")));
    }
    Ok(v.clamp(0.0, 0.5))
}

/// `1/2 - c Σ w ∫γ^{l+τ-1} e^{-(R+δ)γ} (Rγ+β)^{-d} (1 - F₂) dγ`.
fn analytic(m: ModulationScheme, p: &EndToEndParams, ctx: &EvalContext) -> Result<(f64, f64)> {
    let tab = p.table()?;
    let (d, tau) = (m.delta(), m.tau());
    let block = |hop| {
        move |e: &ExpTerm| Block {
            power: e.power as f64 + tau - 1.0,
            decay: e.rate + d,
            rate: e.rate,
            shift: e.shift,
            log: None,
            hop,
        }
    };
    let (t1, e1) = sum_blocks(&tab.survival, tab.beta, p, ctx, block(HopFactor::One))?;
    let (t3, e3) = sum_blocks(&tab.survival, tab.beta, p, ctx, block(HopFactor::Cdf))?;
    let c = prefactor(m);
    Ok((0.5 - c * (t1 - t3), c * (e1 + e3)))
}

/// `c ∫γ^{τ-1} e^{-δγ} F(γ) dγ` with the closed per-hop CDFs, in `γ = u²`.
pub fn average_ber_quadrature(m: ModulationScheme, p: &EndToEndParams) -> Result<f64> {
    let (d, tau) = (m.delta(), m.tau());
    let failure = std::cell::RefCell::new(None);
    let f = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        match e2e_cdf(u * u, p) {
            Ok(c) => 2.0 * u.powf(2.0 * tau - 1.0) * (-d * u * u).exp() * c,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let hi = (80.0 / d).sqrt();
    let mut edges = vec![0.0];
    let mut x = 1e-6 * hi;
    while x < hi {
        edges.push(x);
        x *= 3.0;
    }
    edges.push(hi);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate(f, w[0], w[1], 1e-11, 1e-15)?.value;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    check_range(prefactor(m) * total, 1e-9)
}

/// Average bit error probability.
pub fn average_ber(m: ModulationScheme, p: &EndToEndParams, ctx: &EvalContext, path: BerPath) -> Result<Evaluated> {
    if path == BerPath::Quadrature {
        return Ok(Evaluated {
            value: average_ber_quadrature(m, p)?,
            error: 0.0,
            semi_analytic: true,
        });
    }
    match analytic(m, p, ctx) {
        Ok((v, err)) => Ok(Evaluated {
            value: check_range(v, 1e-6 + err)?,
            error: err,
            semi_analytic: false,
        }),
        Err(e) if recoverable(&e) && ctx.fallback == Fallback::Allow => Ok(Evaluated {
            value: average_ber_quadrature(m, p)?,
            error: 0.0,
            semi_analytic: true,
        }),
        Err(e) => Err(e),
    }
}
