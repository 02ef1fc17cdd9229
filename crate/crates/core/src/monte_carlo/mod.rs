//! Seeded simulation of the relaying link and empirical metric estimates.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, trial)`, so
//! the record sequence does not depend on how trials are spread over workers.

mod sampling;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ModulationScheme;
use crate::sinr::{e2e_sinr_approx, e2e_sinr_exact, EndToEndParams};

pub use sampling::{
    sample_correlated_rf_pair, sample_fso_snr, sample_generalized_gamma, sample_inr, sample_pointing,
    sample_pointing_geometric, sample_turbulence, select_relay,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Current SNR of the selected relay, γ₁.
    pub selected_current_snr: f64,
    /// γ_R.
    pub inr: f64,
    /// γ₂.
    pub fso_snr: f64,
    pub sinr_exact: f64,
    pub sinr_approx: f64,
}

/// Sample mean with its standard error and a normal 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub trials: usize,
    pub ci95: (f64, f64),
}

/// Per-trial functional averaged by [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum McMetric {
    Outage { threshold: f64 },
    Ber { modulation: ModulationScheme },
    Capacity { varpi: f64 },
    OutageCapacity { target: f64, varpi: f64 },
    Moment { nu: f64 },
    Mgf { t: f64 },
}

impl McMetric {
    pub fn apply(&self, g: f64) -> f64 {
        match *self {
            McMetric::Outage { threshold } => (g < threshold) as u8 as f64,
            McMetric::Ber { modulation } => modulation.conditional_error(g),
            McMetric::Capacity { varpi } => (varpi * g).ln_1p() / std::f64::consts::LN_2,
            McMetric::OutageCapacity { target, varpi } => ((varpi * g).ln_1p() / std::f64::consts::LN_2 < target) as u8 as f64,
            McMetric::Moment { nu } => g.powf(nu),
            McMetric::Mgf { t } => (t * g).exp(),
        }
    }
}

/// Which end-to-end SINR a metric is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinrForm {
    Exact,
    /// `min(γ₁/(1+γ_R), γ₂)`, the form the closed-form statistics describe.
    #[default]
    Approx,
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One trial: outdated/current draws for every relay, selection, INR and
/// optical SNR, in that fixed order on the trial's stream.
pub fn run_trial(p: &EndToEndParams, seed: u64, trial: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, trial);
    let rf = p.rf();
    let pairs: Vec<(f64, f64)> = (0..rf.relays).map(|_| sample_correlated_rf_pair(rf, &mut rng)).collect();
    let (outdated, current): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let g1 = select_relay(&outdated, &current, rf.m_sel as usize)?;
    let gr = sample_inr(p.interference(), &mut rng);
    let g2 = sample_fso_snr(p.fso(), &mut rng);
    Ok(TrialRecord {
        selected_current_snr: g1,
        inr: gr,
        fso_snr: g2,
        sinr_exact: e2e_sinr_exact(g1, g2, gr),
        sinr_approx: e2e_sinr_approx(g1, g2, gr),
    })
}

/// `n` records in trial order. `workers = None` uses the global pool.
pub fn run_trials(p: &EndToEndParams, n: usize, seed: u64, workers: Option<usize>) -> Result<Vec<TrialRecord>> {
    if n == 0 {
        return Err(Error::Usage("need at least one trial".into()));
    }
    let run = || (0..n as u64).into_par_iter().map(|t| run_trial(p, seed, t)).collect::<Result<Vec<_>>>();
    match workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?
            .install(run),
    }
}

/// Pairwise summation; the result depends only on the order of `v`.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean and standard error of `values`.
pub fn summarize(values: &[f64]) -> Result<McEstimate> {
    if values.is_empty() {
        return Err(Error::Usage("cannot estimate from zero trials".into()));
    }
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = if values.len() > 1 { pairwise_sum(&dev) / (n - 1.0) } else { 0.0 };
    let se = (var / n).sqrt();
    Ok(McEstimate {
        mean,
        standard_error: se,
        trials: values.len(),
        ci95: (mean - 1.96 * se, mean + 1.96 * se),
    })
}

pub fn estimate(metric: McMetric, records: &[TrialRecord], form: SinrForm) -> Result<McEstimate> {
    let values: Vec<f64> = records
        .iter()
        .map(|r| {
            metric.apply(match form {
                SinrForm::Exact => r.sinr_exact,
                SinrForm::Approx => r.sinr_approx,
            })
        })
        .collect();
    summarize(&values)
}

/// Raw dump: `trial,gamma1,gammaR,gamma2,sinr_exact,sinr_approx`.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    writeln!(out, "trial,gamma1,gammaR,gamma2,sinr_exact,sinr_approx")?;
    for (i, r) in records.iter().enumerate() {
        writeln!(
            out,
            "{i},{:e},{:e},{:e},{:e},{:e}",
            r.selected_current_snr, r.inr, r.fso_snr, r.sinr_exact, r.sinr_approx
        )?;
    }
    Ok(())
}
