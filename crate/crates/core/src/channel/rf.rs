//! Nakagami-m first hop with partial relay selection on outdated CSI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::bessel::bessel_j0;
use crate::specfun::gamma::{binomial, factorial, ln_gamma, lower_regularized_int};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfLinkParams {
    pub m_sr: u32,
    /// γ̄_SR, linear.
    pub avg_snr: f64,
    /// Number of relays M.
    pub relays: u32,
    /// Selected ascending rank (m-th worst).
    pub m_sel: u32,
    pub rho: f64,
    /// Optional (f_d in Hz, T_d in s); when present `rho` is recomputed from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doppler_delay: Option<(f64, f64)>,
}

impl RfLinkParams {
    pub fn new(m_sr: u32, avg_snr: f64, relays: u32, m_sel: u32, rho: f64) -> Result<Self> {
        let p = Self {
            m_sr,
            avg_snr,
            relays,
            m_sel,
            rho,
            doppler_delay: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_sr < 1 {
            return Err(Error::config("rf.m_sr", "must be a positive integer"));
        }
        if !(self.avg_snr > 0.0 && self.avg_snr.is_finite()) {
            return Err(Error::config("rf.avg_snr", "must be positive and finite"));
        }
        if self.relays < 1 {
            return Err(Error::config("rf.relays", "need at least one relay"));
        }
        if self.m_sel < 1 || self.m_sel > self.relays {
            return Err(Error::config("rf.m_sel", format!("rank must lie in [1, {}]", self.relays)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config("rf.rho", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Apply the Doppler/delay pair, if any, to `rho`.
    pub fn resolve_rho(&mut self) -> Result<()> {
        if let Some((fd, td)) = self.doppler_delay {
            self.rho = rho_from_jakes(fd, td)?;
        }
        Ok(())
    }

    fn rate(&self) -> f64 {
        self.m_sr as f64 / self.avg_snr
    }
}

/// Time correlation `J₀(2π f_d T_d)` of the Jakes model.
///
/// The selection analysis treats `rho` as a power correlation in `[0, 1]`,
/// so beyond the first zero of `J₀` the result is clamped at 0.
pub fn rho_from_jakes(fd: f64, td: f64) -> Result<f64> {
    if !(fd >= 0.0 && td >= 0.0) {
        return Err(Error::Domain("Doppler frequency and delay must be nonnegative".into()));
    }
    Ok(bessel_j0(2.0 * std::f64::consts::PI * fd * td)?.max(0.0))
}

/// Gamma(m_SR, γ̄/m_SR) density of an unselected link.
pub fn rf_snr_pdf_outdated(g: f64, p: &RfLinkParams) -> f64 {
    if g < 0.0 {
        return 0.0;
    }
    gamma_density(p.m_sr, p.rate(), g)
}

/// Finite-sum CDF of an unselected link.
pub fn rf_snr_cdf_outdated(g: f64, p: &RfLinkParams) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    lower_regularized_int(p.m_sr, p.rate() * g)
}

pub(crate) fn gamma_density(k: u32, rate: f64, x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match k {
            1 => rate,
            _ => 0.0,
        };
    }
    let k = k as f64;
    (k * rate.ln() + (k - 1.0) * x.ln() - rate * x - ln_gamma(k)).exp()
}

/// Coefficients of `(Σ_{i<m} x^i/i!)^j`, degrees `0..=j(m-1)`.
pub fn xi_coefficients(m: u32, j: u32) -> Vec<f64> {
    let m = m.max(1) as usize;
    let mut acc = vec![1.0];
    for _ in 0..j {
        let mut next = vec![0.0; acc.len() + m - 1];
        for (i, a) in acc.iter().enumerate() {
            for d in 0..m {
                next[i + d] += a / factorial(d as u32);
            }
        }
        acc = next;
    }
    acc
}

/// One term `w · Gamma(shape, rate)` of the selected-relay SNR density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaTerm {
    pub weight: f64,
    pub shape: u32,
    pub rate: f64,
    /// Index tuple (n, i, v) the term came from.
    pub index: (u32, u32, u32),
}

/// The selected-relay SNR density as a signed mixture of Gamma densities;
/// weights sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedSnrTable {
    pub terms: Vec<GammaTerm>,
}

impl SelectedSnrTable {
    pub fn new(p: &RfLinkParams) -> Result<Self> {
        p.validate()?;
        let big_m = p.relays;
        let m = p.m_sel;
        let msr = p.m_sr;
        let a = p.rate();
        let rho = p.rho;
        let lead = m as f64 * binomial(big_m, m);
        let ln_g_msr = ln_gamma(msr as f64);
        let mut terms = Vec::new();
        for n in 0..m {
            // F^{m-1} (1-F)^{M-m} expands into survival powers n + M - m
            let j = n + big_m - m;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c_n = lead * binomial(m - 1, n) * sign;
            let xi = xi_coefficients(msr, j);
            let denom = 1.0 + j as f64 * (1.0 - rho);
            let rate = a * (j as f64 + 1.0) / denom;
            for (i, &xi_i) in xi.iter().enumerate() {
                let i = i as u32;
                let g_ratio = (ln_gamma((msr + i) as f64) - ln_g_msr).exp();
                for v in 0..=i {
                    let rv = rho.powi(v as i32) * (1.0 - rho).powi((i - v) as i32);
                    if rv == 0.0 {
                        continue;
                    }
                    let k = msr + v;
                    let w = c_n * xi_i * binomial(i, v) * g_ratio * rv
                        / (denom.powi(i as i32) * (j as f64 + 1.0).powi(k as i32));
                    terms.push(GammaTerm {
                        weight: w,
                        shape: k,
                        rate,
                        index: (n, i, v),
                    });
                }
            }
        }
        let total: f64 = terms.iter().map(|t| t.weight).sum();
        if !((total - 1.0).abs() < 1e-8) {
            return Err(Error::Consistency(format!(
                "selected-relay mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { terms })
    }

    pub fn pdf(&self, g: f64) -> f64 {
        self.terms.iter().map(|t| t.weight * gamma_density(t.shape, t.rate, g)).sum()
    }

    pub fn cdf(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        let s: f64 = self
            .terms
            .iter()
            .map(|t| t.weight * lower_regularized_int(t.shape, t.rate * g))
            .sum();
        s.clamp(0.0, 1.0)
    }

    /// `E[γ₁^s]` for real `s > -min shape`.
    pub fn moment(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let k = t.shape as f64;
                t.weight * (ln_gamma(k + s) - ln_gamma(k) - s * t.rate.ln()).exp()
            })
            .sum()
    }
}

pub fn rf_selected_snr_pdf(g: f64, p: &RfLinkParams) -> Result<f64> {
    Ok(SelectedSnrTable::new(p)?.pdf(g))
}

pub fn rf_selected_snr_cdf(g: f64, p: &RfLinkParams) -> Result<f64> {
    Ok(SelectedSnrTable::new(p)?.cdf(g))
}
