//! Effective first-hop SNR `γ₁/(1 + γ_R)` after averaging over the INR.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::interference::InterferenceParams;
use crate::channel::rf::{GammaTerm, RfLinkParams, SelectedSnrTable};
use crate::error::Result;
use crate::specfun::gamma::{binomial, ln_gamma, lower_regularized_int};

/// `weight · γ^power · (rate·γ + β)^{-shift} · e^{-rate·γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub weight: f64,
    pub power: u32,
    pub shift: u32,
    pub rate: f64,
}

impl ExpTerm {
    pub fn eval(&self, g: f64, beta: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let mut ln = -self.rate * g - self.shift as f64 * (self.rate * g + beta).ln();
        if self.power > 0 {
            if g == 0.0 {
                return 0.0;
            }
            ln += self.power as f64 * g.ln();
        }
        self.weight * ln.exp()
    }
}

/// Expansion coefficients shared by the closed forms: the survival function
/// `1 - F_eff` and the density `f_eff` as sums of [`ExpTerm`]s, aggregated
/// over index tuples with equal (rate, power, shift).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub selected: Vec<GammaTerm>,
    pub survival: Vec<ExpTerm>,
    pub density: Vec<ExpTerm>,
    /// β_R; unused when interference-free.
    pub beta: f64,
    pub m_r: u32,
}

fn aggregate(map: BTreeMap<(u64, u32, u32), f64>) -> Vec<ExpTerm> {
    map.into_iter()
        .filter(|(_, w)| *w != 0.0)
        .map(|((rate, power, shift), weight)| ExpTerm {
            weight,
            power,
            shift,
            rate: f64::from_bits(rate),
        })
        .collect()
}

impl CoefficientTable {
    pub fn new(rf: &RfLinkParams, intf: &InterferenceParams) -> Result<Self> {
        intf.validate()?;
        let sel = SelectedSnrTable::new(rf)?;
        let free = intf.is_free();
        let m_r = intf.m_r();
        let beta = intf.beta_r;
        // ln[β^{m_R} Γ(m_R + s)/Γ(m_R)]
        let inr_moment = |s: u32| -> f64 {
            m_r as f64 * beta.ln() + ln_gamma((m_r + s) as f64) - ln_gamma(m_r as f64)
        };
        let mut surv = BTreeMap::new();
        let mut dens = BTreeMap::new();
        for t in &sel.terms {
            let key_rate = t.rate.to_bits();
            let k = t.shape;
            for l in 0..k {
                let base = t.weight * (l as f64 * t.rate.ln() - ln_gamma(l as f64 + 1.0)).exp();
                if free {
                    *surv.entry((key_rate, l, 0)).or_insert(0.0) += base;
                } else {
                    for s in 0..=l {
                        let w = base * binomial(l, s) * inr_moment(s).exp();
                        *surv.entry((key_rate, l, m_r + s)).or_insert(0.0) += w;
                    }
                }
            }
            let bcoef = t.weight * (k as f64 * t.rate.ln() - ln_gamma(k as f64)).exp();
            if free {
                *dens.entry((key_rate, k - 1, 0)).or_insert(0.0) += bcoef;
            } else {
                for u in 0..=k {
                    let w = bcoef * binomial(k, u) * inr_moment(u).exp();
                    *dens.entry((key_rate, k - 1, m_r + u)).or_insert(0.0) += w;
                }
            }
        }
        Ok(Self {
            selected: sel.terms,
            survival: aggregate(surv),
            density: aggregate(dens),
            beta,
            m_r,
        })
    }

    pub fn interference_free(&self) -> bool {
        self.m_r == 0
    }

    /// `1 - F_eff(γ)` from the survival expansion.
    pub fn survival(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 1.0;
        }
        self.survival.iter().map(|t| t.eval(g, self.beta)).sum()
    }

    pub fn pdf(&self, g: f64) -> f64 {
        if g < 0.0 {
            return 0.0;
        }
        if g == 0.0 {
            return self.density.iter().filter(|t| t.power == 0).map(|t| t.eval(0.0, self.beta)).sum();
        }
        self.density.iter().map(|t| t.eval(g, self.beta)).sum::<f64>().max(0.0)
    }

    /// `F_eff(γ)`, switching per selected term to a cancellation-free tail
    /// series when `A₁γ` is small.
    pub fn cdf(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for t in &self.selected {
            total += t.weight * self.term_cdf(t, g);
        }
        total.clamp(0.0, 1.0)
    }

    fn term_cdf(&self, t: &GammaTerm, g: f64) -> f64 {
        let x = t.rate * g;
        if self.interference_free() {
            return lower_regularized_int(t.shape, x);
        }
        let m_r = self.m_r as f64;
        let beta = self.beta;
        // E[(1 + γ_R)^l e^{-x γ_R}] = Σ_s C(l,s) β^{m_R} Γ(m_R+s)/Γ(m_R) (x+β)^{-(m_R+s)}
        let mixed = |l: u32| -> f64 {
            (0..=l)
                .map(|s| {
                    let ln = m_r * beta.ln() + ln_gamma(m_r + s as f64) - ln_gamma(m_r) - (m_r + s as f64) * (x + beta).ln();
                    binomial(l, s) * ln.exp()
                })
                .sum()
        };
        let pois = |l: u32| (l as f64 * x.ln() - x - ln_gamma(l as f64 + 1.0)).exp();
        if x * (1.0 + m_r / beta) < 0.5 {
            let mut sum = 0.0;
            let mut l = t.shape;
            loop {
                let term = pois(l) * mixed(l);
                sum += term;
                if term <= 1e-17 * sum || l > t.shape + 400 {
                    break;
                }
                l += 1;
            }
            sum
        } else {
            let surv: f64 = (0..t.shape).map(|l| pois(l) * mixed(l)).sum();
            1.0 - surv
        }
    }
}
