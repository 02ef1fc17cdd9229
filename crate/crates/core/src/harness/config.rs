//! Versioned JSON scenario schema.
//!
//! Every section is optional; absent fields take the reference-link
//! defaults. Unknown fields are rejected so typos surface as errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::fso::{derive_pointing_coefficients, path_loss, Detection, FsoLinkParams, PointingGeometry};
use crate::channel::interference::InterferenceParams;
use crate::channel::rf::RfLinkParams;
use crate::error::{Error, Result};
use crate::metrics::ModulationScheme;
use crate::sinr::{EndToEndParams, Fallback};

use super::presets::FigureId;

pub const SCHEMA_VERSION: u32 = 1;

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfConfig {
    pub m_sr: u32,
    pub relays: u32,
    /// Ascending rank of the selected relay; `None` picks the best (= relays).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_sel: Option<u32>,
    pub rho: f64,
    /// `(f_d [Hz], T_d [s])`; overrides `rho` through the Jakes model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doppler_delay: Option<(f64, f64)>,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            m_sr: 2,
            relays: 3,
            m_sel: None,
            rho: 0.9,
            doppler_delay: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferenceConfig {
    /// M_R.
    pub count: usize,
    /// m_R, shared by all interferers.
    pub shape: u32,
    pub beta_r: f64,
}

impl Default for InterferenceConfig {
    fn default() -> Self {
        Self {
            count: 5,
            shape: 5,
            beta_r: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbulenceConfig {
    pub alpha1: f64,
    pub alpha2: f64,
    pub m1: u32,
    pub m2: u32,
    pub omega1: f64,
    pub omega2: f64,
    pub p: u32,
    pub q: u32,
}

impl Default for TurbulenceConfig {
    fn default() -> Self {
        Self {
            alpha1: 1.0,
            alpha2: 1.0,
            m1: 3,
            m2: 3,
            omega1: 1.0,
            omega2: 1.0,
            p: 2,
            q: 2,
        }
    }
}

/// Quantity varied along the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Sets γ̄_SR and μ_r together, in dB.
    SnrDb,
    AvgSnrDb,
    MuRDb,
    Rho,
    BetaR,
    /// Weather attenuation σ, dB/km.
    Attenuation,
    /// Pointing jitter σ_s, m.
    JitterSigma,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::AvgSnrDb => "avg_snr_db",
            SweepAxis::MuRDb => "mu_r_db",
            SweepAxis::Rho => "rho",
            SweepAxis::BetaR => "beta_r",
            SweepAxis::Attenuation => "attenuation",
            SweepAxis::JitterSigma => "jitter_sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            axis: SweepAxis::SnrDb,
            values: (0..8).map(|k| 5.0 * k as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Outage { threshold_db: f64 },
    Ber { modulation: ModulationScheme },
    Capacity,
    /// Target rate in bits/s/Hz.
    OutageCapacity { target: f64 },
    Moment { order: u32 },
}

impl MetricSpec {
    /// Short identifier used in file names and CSV rows.
    pub fn name(&self) -> String {
        match self {
            MetricSpec::Outage { threshold_db } => format!("outage_{threshold_db}db"),
            MetricSpec::Ber { modulation } => format!("ber_{}", modulation.name().to_lowercase()),
            MetricSpec::Capacity => "capacity".into(),
            MetricSpec::OutageCapacity { target } => format!("outage_capacity_{target}"),
            MetricSpec::Moment { order } => format!("moment_{order}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub label: String,
    pub rf: RfConfig,
    pub interference: InterferenceConfig,
    pub turbulence: TurbulenceConfig,
    pub geometry: PointingGeometry,
    pub detection: Detection,
    /// γ̄_SR when the sweep does not set it.
    pub avg_snr_db: f64,
    /// μ_r when the sweep does not set it.
    pub mu_r_db: f64,
    pub sweep: Sweep,
    pub metrics: Vec<MetricSpec>,
    /// Monte Carlo trials per point; 0 skips simulation.
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure_id: Option<FigureId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub fallback: Fallback,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            label: "baseline".into(),
            rf: RfConfig::default(),
            interference: InterferenceConfig::default(),
            turbulence: TurbulenceConfig::default(),
            geometry: PointingGeometry::default(),
            detection: Detection::Heterodyne,
            avg_snr_db: 20.0,
            mu_r_db: 20.0,
            sweep: Sweep::default(),
            metrics: vec![MetricSpec::Outage { threshold_db: 5.0 }],
            trials: 1_000_000,
            seed: 1,
            figure_id: None,
            output: None,
            fallback: Fallback::Allow,
        }
    }
}

/// Defaults that no table fixes, listed in every run manifest.
pub const UNSTATED_DEFAULTS: &[&str] = &[
    "m_SR = 2 (RF fading severity)",
    "M = 3 relays, best relay selected (m_sel = M), rho = 0.9",
    "beta_R = 10 (per-interferer mean INR m_R/beta_R = 0.5)",
    "alpha1 = alpha2 = 1, Omega1 = Omega2 = 1 (turbulence shape and power)",
    "gamma_th = 5 dB for outage metrics",
    "snr_db sets gamma_SR = mu_r; mu_r multiplies (I_a I_l I_p)^r, so the optical hop's mean SNR sits below it by the pointing and path-loss factors",
];

fn field(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    Error::Config {
        field: if path == "." { "<root>".into() } else { path },
        reason: e.into_inner().to_string(),
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(field)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::config("sweep.values", "sweep must have at least one point"));
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep.values", "values must be finite"));
        }
        if self.metrics.is_empty() {
            return Err(Error::config("metrics", "need at least one metric"));
        }
        for m in &self.metrics {
            match *m {
                MetricSpec::Outage { threshold_db } if !threshold_db.is_finite() => {
                    return Err(Error::config("metrics.threshold_db", "must be finite"))
                }
                MetricSpec::OutageCapacity { target } if !(target >= 0.0 && target.is_finite()) => {
                    return Err(Error::config("metrics.target", "must be nonnegative and finite"))
                }
                MetricSpec::Moment { order: 0 } => return Err(Error::config("metrics.order", "must be positive")),
                _ => {}
            }
        }
        if self.interference.count > 0 && self.interference.shape == 0 {
            return Err(Error::config("interference.shape", "must be a positive integer"));
        }
        for &x in &self.sweep.values {
            self.params_at(x)?;
        }
        Ok(())
    }

    /// Pointing geometry after the sweep value `x` is applied.
    pub fn geometry_at(&self, x: f64) -> PointingGeometry {
        let mut g = self.geometry.clone();
        match self.sweep.axis {
            SweepAxis::Attenuation => g.attenuation = x,
            SweepAxis::JitterSigma => g.jitter_sigma = x,
            _ => {}
        }
        g
    }

    /// Closed-form parameter record at sweep value `x`.
    pub fn params_at(&self, x: f64) -> Result<EndToEndParams> {
        let (mut snr, mut mu) = (self.avg_snr_db, self.mu_r_db);
        let mut rho = self.rf.rho;
        let mut beta = self.interference.beta_r;
        match self.sweep.axis {
            SweepAxis::SnrDb => (snr, mu) = (x, x),
            SweepAxis::AvgSnrDb => snr = x,
            SweepAxis::MuRDb => mu = x,
            SweepAxis::Rho => rho = x,
            SweepAxis::BetaR => beta = x,
            SweepAxis::Attenuation | SweepAxis::JitterSigma => {}
        }
        let mut rf = RfLinkParams {
            m_sr: self.rf.m_sr,
            avg_snr: db(snr),
            relays: self.rf.relays,
            m_sel: self.rf.m_sel.unwrap_or(self.rf.relays),
            rho,
            doppler_delay: self.rf.doppler_delay,
        };
        rf.resolve_rho()?;
        let interference = if self.interference.count == 0 {
            InterferenceParams::none()
        } else {
            InterferenceParams::uniform(self.interference.count, self.interference.shape, beta)?
        };
        let geom = self.geometry_at(x);
        let pc = derive_pointing_coefficients(&geom)?;
        let t = &self.turbulence;
        let fso = FsoLinkParams {
            alpha1: t.alpha1,
            alpha2: t.alpha2,
            m1: t.m1,
            m2: t.m2,
            omega1: t.omega1,
            omega2: t.omega2,
            p: t.p,
            q: t.q,
            xi: pc.xi,
            a0: pc.a0,
            path_loss: path_loss(&geom),
            detection: self.detection,
            mu_r: db(mu),
        };
        EndToEndParams::new(rf, interference, fso)
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("<file>", format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}
