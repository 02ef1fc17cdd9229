//! Per-trial random draws.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::channel::fso::{derive_pointing_coefficients, pointing_gain, FsoLinkParams, PointingGeometry};
use crate::channel::interference::InterferenceParams;
use crate::channel::rf::RfLinkParams;
use crate::error::{Error, Result};

fn gamma_draw<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, scale).expect("positive shape and scale").sample(rng)
}

/// `(outdated, current)` SNRs of one relay link.
///
/// Sums `m_SR` pairs of unit complex Gaussians whose members correlate with
/// coefficient `√ρ`, which realizes the bivariate Nakagami-m law with power
/// correlation ρ exactly.
pub fn sample_correlated_rf_pair<R: Rng + ?Sized>(p: &RfLinkParams, rng: &mut R) -> (f64, f64) {
    let a = p.rho.sqrt();
    let b = (1.0 - p.rho).max(0.0).sqrt();
    let mut outdated = 0.0;
    let mut current = 0.0;
    for _ in 0..p.m_sr {
        // real and imaginary parts with variance 1/2 each
        let xr: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
        let xi: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
        let wr: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
        let wi: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
        let yr = a * xr + b * wr;
        let yi = a * xi + b * wi;
        outdated += xr * xr + xi * xi;
        current += yr * yr + yi * yi;
    }
    let scale = p.avg_snr / p.m_sr as f64;
    (outdated * scale, current * scale)
}

/// Current SNR of the relay whose outdated SNR has ascending rank `m_sel`;
/// ties go to the lowest index.
pub fn select_relay(outdated: &[f64], current: &[f64], m_sel: usize) -> Result<f64> {
    if outdated.len() != current.len() {
        return Err(Error::config("select_relay", "outdated and current lists differ in length"));
    }
    if m_sel < 1 || m_sel > outdated.len() {
        return Err(Error::config("m_sel", format!("rank {m_sel} outside [1, {}]", outdated.len())));
    }
    let mut idx: Vec<usize> = (0..outdated.len()).collect();
    idx.sort_by(|&i, &j| outdated[i].total_cmp(&outdated[j]));
    Ok(current[idx[m_sel - 1]])
}

/// Aggregate INR: one Gamma(m_k, 1/β_R) draw per interferer.
pub fn sample_inr<R: Rng + ?Sized>(p: &InterferenceParams, rng: &mut R) -> f64 {
    let scale = 1.0 / p.beta_r;
    p.shapes.iter().map(|&m| gamma_draw(m as f64, scale, rng)).sum()
}

/// Generalized Gamma draw with `E[X^s] = (Ω/m)^{s/α} Γ(m + s/α)/Γ(m)`.
pub fn sample_generalized_gamma<R: Rng + ?Sized>(alpha: f64, m: f64, omega: f64, rng: &mut R) -> f64 {
    (gamma_draw(m, omega / m, rng)).powf(1.0 / alpha)
}

/// Turbulence irradiance `I_a = I_x I_y`.
pub fn sample_turbulence<R: Rng + ?Sized>(p: &FsoLinkParams, rng: &mut R) -> f64 {
    let x = sample_generalized_gamma(p.alpha1, p.m1 as f64, p.omega1, rng);
    let y = sample_generalized_gamma(p.alpha2, p.m2 as f64, p.omega2, rng);
    x * y
}

/// `I_p = A₀ exp(-R²/(2ξ²σ_s²))` for a Rayleigh(σ_s) radial displacement,
/// written in units of σ_s.
pub fn sample_pointing<R: Rng + ?Sized>(p: &FsoLinkParams, rng: &mut R) -> f64 {
    // R²/σ_s² is exponential with mean 2
    let u: f64 = -2.0 * (1.0 - rng.gen::<f64>()).ln();
    p.a0 * (-u / (2.0 * p.xi * p.xi)).exp()
}

/// Pointing gain from the beam geometry directly.
pub fn sample_pointing_geometric<R: Rng + ?Sized>(geom: &PointingGeometry, rng: &mut R) -> Result<f64> {
    let c = derive_pointing_coefficients(geom)?;
    let u: f64 = -2.0 * (1.0 - rng.gen::<f64>()).ln();
    Ok(pointing_gain(geom.jitter_sigma * u.sqrt(), c.a0, c.w_leq))
}

/// Instantaneous optical SNR `μ_r (I_a I_l I_p)^r`.
pub fn sample_fso_snr<R: Rng + ?Sized>(p: &FsoLinkParams, rng: &mut R) -> f64 {
    let ia = sample_turbulence(p, rng);
    let ip = sample_pointing(p, rng);
    p.mu_r * (ia * p.path_loss * ip).powf(p.r())
}
