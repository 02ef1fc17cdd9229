//! Scenario sets behind Figures 2–9.
//!
//! Each preset changes only the fields its figure is about; the rest keep
//! their defaults and are listed in `notes` for the manifest.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::fso::Detection;
use crate::error::{Error, Result};
use crate::metrics::ModulationScheme;

use super::config::{MetricSpec, ScenarioConfig, Sweep, SweepAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("figure_id", format!("unknown figure `{s}` (expected fig2..fig9)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: FigureId,
    /// One scenario per curve family.
    pub scenarios: Vec<ScenarioConfig>,
    /// Choices the figure does not pin down.
    pub notes: Vec<String>,
}

fn snr_grid(max_db: u32) -> Sweep {
    Sweep {
        axis: SweepAxis::SnrDb,
        values: (0..=max_db / 5).map(|k| 5.0 * k as f64).collect(),
    }
}

fn base(id: FigureId, label: String, metrics: Vec<MetricSpec>) -> ScenarioConfig {
    ScenarioConfig {
        label,
        metrics,
        figure_id: Some(id),
        ..ScenarioConfig::default()
    }
}

const OUTAGE: MetricSpec = MetricSpec::Outage { threshold_db: 5.0 };

pub fn figure_preset(id: FigureId) -> FigurePreset {
    let mut notes = Vec::new();
    let scenarios = match id {
        FigureId::Fig2 => {
            notes.push("m_SR = 1; profiles: no interference and beta_R in {100, 10, 2} at M_R = m_R = 5".into());
            let mut v = Vec::new();
            for (label, count, beta) in [("no_interference", 0, 10.0), ("beta_100", 5, 100.0), ("beta_10", 5, 10.0), ("beta_2", 5, 2.0)] {
                let mut c = base(id, label.into(), vec![OUTAGE]);
                c.rf.m_sr = 1;
                c.interference.count = count;
                c.interference.beta_r = beta;
                v.push(c);
            }
            v
        }
        FigureId::Fig3 => {
            notes.push("pointing severity via sigma_s in {3.75, 15, 30} cm (xi about 6.9, 1.7, 0.86)".into());
            let mut v = Vec::new();
            for det in [Detection::Heterodyne, Detection::ImDd] {
                for (tag, jitter) in [("s3.75cm", 0.0375), ("s15cm", 0.15), ("s30cm", 0.3)] {
                    let d = if det == Detection::Heterodyne { "het" } else { "imdd" };
                    let mut c = base(id, format!("{d}_{tag}"), vec![OUTAGE]);
                    c.detection = det;
                    c.geometry.jitter_sigma = jitter;
                    v.push(c);
                }
            }
            v
        }
        FigureId::Fig4 => {
            let metrics = ModulationScheme::ALL.iter().map(|&m| MetricSpec::Ber { modulation: m }).collect();
            vec![base(id, "modulations".into(), metrics)]
        }
        FigureId::Fig5 => {
            notes.push("attenuation sigma in {0.4, 4.5, 7} dB/km, SNR grid 0-50 dB".into());
            [("sigma_0.4", 0.4), ("sigma_4.5", 4.5), ("sigma_7", 7.0)]
                .into_iter()
                .map(|(label, sigma)| {
                    let mut c = base(id, label.into(), vec![MetricSpec::Capacity]);
                    c.geometry.attenuation = sigma;
                    c.sweep = snr_grid(50);
                    c
                })
                .collect()
        }
        FigureId::Fig6 => {
            notes.push("rho in {0.001, 0.5, 0.9, 0.99}, SNR grid 0-50 dB".into());
            [("rho_0.001", 0.001), ("rho_0.5", 0.5), ("rho_0.9", 0.9), ("rho_0.99", 0.99)]
                .into_iter()
                .map(|(label, rho)| {
                    let mut c = base(id, label.into(), vec![MetricSpec::Capacity]);
                    c.rf.rho = rho;
                    c.sweep = snr_grid(50);
                    c
                })
                .collect()
        }
        FigureId::Fig7 => {
            notes.push("M in {1, 3, 5} with best-relay selection, SNR grid 0-50 dB".into());
            [1, 3, 5]
                .into_iter()
                .map(|m| {
                    let mut c = base(id, format!("relays_{m}"), vec![MetricSpec::Capacity]);
                    c.rf.relays = m;
                    c.rf.m_sel = None;
                    c.sweep = snr_grid(50);
                    c
                })
                .collect()
        }
        FigureId::Fig8 => {
            notes.push("target rate C_T in {0.5, 1, 2, 3} bits/s/Hz".into());
            let metrics = [0.5, 1.0, 2.0, 3.0].map(|t| MetricSpec::OutageCapacity { target: t }).to_vec();
            let mut c = base(id, "thresholds".into(), metrics);
            c.sweep = snr_grid(50);
            vec![c]
        }
        FigureId::Fig9 => {
            notes.push("(alpha1, alpha2) in {(4, 2), (3, 1.5), (0.5, 0.25)} with p = 2, q = 1; C_T = 1 bit/s/Hz".into());
            [("alpha_4_2", 4.0, 2.0), ("alpha_3_1.5", 3.0, 1.5), ("alpha_0.5_0.25", 0.5, 0.25)]
                .into_iter()
                .map(|(label, a1, a2)| {
                    let mut c = base(id, label.into(), vec![MetricSpec::OutageCapacity { target: 1.0 }]);
                    c.turbulence.alpha1 = a1;
                    c.turbulence.alpha2 = a2;
                    c.turbulence.p = 2;
                    c.turbulence.q = 1;
                    c.sweep = snr_grid(50);
                    c
                })
                .collect()
        }
    };
    FigurePreset { id, scenarios, notes }
}
