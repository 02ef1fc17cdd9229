//! End-user metrics: outage, its high-SNR behaviour, average bit error rate
//! and ergodic/outage capacity.

mod ber;
mod capacity;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::fso::{Detection, FsoLinkParams};
use crate::error::{Error, Result};
use crate::sinr::{e2e_cdf, EndToEndParams};
use crate::specfun::gamma::{binomial, factorial, ln_gamma};

pub use ber::{average_ber, average_ber_quadrature, BerPath};
pub use capacity::{capacity_terms, ergodic_capacity, ergodic_capacity_semi_analytic, outage_capacity, CapacityTerms};

/// Binary modulation with conditional error `Γ(τ, δγ)/(2Γ(τ))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModulationScheme {
    Cbfsk,
    Nbfsk,
    Cbpsk,
    Dbpsk,
}

impl ModulationScheme {
    pub const ALL: [ModulationScheme; 4] = [Self::Cbfsk, Self::Nbfsk, Self::Cbpsk, Self::Dbpsk];

    pub fn delta(self) -> f64 {
        match self {
            Self::Cbfsk | Self::Nbfsk => 0.5,
            Self::Cbpsk | Self::Dbpsk => 1.0,
        }
    }

    pub fn tau(self) -> f64 {
        match self {
            Self::Cbfsk | Self::Cbpsk => 0.5,
            Self::Nbfsk | Self::Dbpsk => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Cbfsk => "CBFSK",
            Self::Nbfsk => "NBFSK",
            Self::Cbpsk => "CBPSK",
            Self::Dbpsk => "DBPSK",
        }
    }

    /// Error probability conditioned on the instantaneous SNR.
    pub fn conditional_error(self, g: f64) -> f64 {
        let d = self.delta();
        if self.tau() == 1.0 {
            0.5 * (-d * g).exp()
        } else {
            0.5 * libm::erfc((d * g).sqrt())
        }
    }
}

impl std::str::FromStr for ModulationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("modulation", format!("unknown scheme {s:?}")))
    }
}

/// The constant ϖ inside `log₂(1 + ϖγ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConstant {
    pub varpi: f64,
}

impl DetectionConstant {
    pub fn for_detection(d: Detection) -> Self {
        let varpi = match d {
            Detection::Heterodyne => 1.0,
            Detection::ImDd => std::f64::consts::E / (2.0 * PI),
        };
        Self { varpi }
    }
}

/// `Pr(γ < γ_T)`.
pub fn outage_probability(threshold: f64, p: &EndToEndParams) -> Result<f64> {
    if !(threshold >= 0.0) {
        return Err(Error::Domain(format!("outage threshold must be nonnegative, got {threshold}")));
    }
    if threshold.is_infinite() {
        return Ok(1.0);
    }
    e2e_cdf(threshold, p)
}

/// `min(ξ²/r, m₁α₁/r, m₂α₂/r, m_SR)`.
pub fn diversity_gain(p: &EndToEndParams) -> f64 {
    let f = p.fso();
    (f.tail_order() / f.r()).min(p.rf().m_sr as f64)
}

/// Leading small-argument term `c γ^k` of the selected-relay CDF.
fn rf_leading_term(p: &EndToEndParams) -> Result<(u32, f64)> {
    let t = p.table()?;
    let mut by_shape = std::collections::BTreeMap::<u32, (f64, f64)>::new();
    for g in &t.selected {
        let c = g.weight * g.rate.powi(g.shape as i32) / factorial(g.shape);
        let e = by_shape.entry(g.shape).or_default();
        e.0 += c;
        e.1 += c.abs();
    }
    by_shape
        .into_iter()
        .find(|(_, (c, scale))| c.abs() > 1e-10 * scale)
        .map(|(k, (c, _))| (k, c))
        .ok_or_else(|| Error::Consistency("selected-relay CDF has no nonzero leading term".into()))
}

/// `E[(1 + γ_R)^k]`.
fn inr_binomial_moment(p: &EndToEndParams, k: u32) -> f64 {
    let intf = p.interference();
    if intf.is_free() {
        return 1.0;
    }
    let m_r = intf.m_r() as f64;
    (0..=k)
        .map(|i| binomial(k, i) * (ln_gamma(m_r + i as f64) - ln_gamma(m_r) - i as f64 * intf.beta_r.ln()).exp())
        .sum()
}

/// Singularities of `s ↦ E[γ₂^{-s}]` on the positive axis, ascending.
fn fso_poles(f: &FsoLinkParams, count: usize) -> Vec<f64> {
    let r = f.r();
    let mut poles = vec![f.xi * f.xi / r];
    for k in 0..count {
        poles.push((f.m1 as f64 + k as f64) * f.alpha1 / r);
        poles.push((f.m2 as f64 + k as f64) * f.alpha2 / r);
    }
    poles.sort_by(f64::total_cmp);
    poles
}

/// Leading small-argument part of the optical-hop CDF: minus the residue of
/// `γ^s E[γ₂^{-s}]/s` at the nearest pole cluster, taken on a small circle so
/// coincident poles (log terms) need no special casing.
fn fso_cdf_leading(g: f64, f: &FsoLinkParams) -> Result<f64> {
    let poles = fso_poles(f, 3);
    let a = poles[0];
    let cluster_end = poles.iter().copied().filter(|&x| x - a <= 1e-3 * a).fold(a, f64::max);
    let next = poles.iter().copied().find(|&x| x > cluster_end).unwrap_or(3.0 * a);
    let radius = (0.5 * (next - a)).min(0.5 * a).max(2.0 * (cluster_end - a) + 1e-9 * a);
    const N: usize = 64;
    let ln_g = g.ln();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..N {
        let th = 2.0 * PI * (k as f64 + 0.5) / N as f64;
        let dir = Complex64::from_polar(1.0, th);
        let s = a + radius * dir;
        let v = (s * ln_g + f.ln_mellin(-s)?).exp() / s;
        acc += v * dir;
    }
    Ok(-(acc * radius / N as f64).re)
}

/// High-SNR outage: the minimal-exponent optical term plus the order-`m_SR`
/// RF term.
pub fn asymptotic_outage(threshold: f64, p: &EndToEndParams) -> Result<f64> {
    if threshold <= 0.0 {
        return Ok(0.0);
    }
    let (k, c) = rf_leading_term(p)?;
    let rf = c * threshold.powi(k as i32) * inr_binomial_moment(p, k);
    Ok(rf + fso_cdf_leading(threshold, p.fso())?)
}
