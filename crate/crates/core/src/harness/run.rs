//! Scenario execution, CSV output and analytic-versus-simulation reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{average_ber, ergodic_capacity, outage_capacity, outage_probability, BerPath, DetectionConstant};
use crate::monte_carlo::{estimate, run_trials, McEstimate, McMetric, SinrForm, TrialRecord};
use crate::sinr::{e2e_moment, EndToEndParams, EvalContext};

use super::config::{MetricSpec, ScenarioConfig, UNSTATED_DEFAULTS};
use super::presets::FigurePreset;

/// Which columns a run fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Analytic,
    Simulate,
    Both,
}

impl RunMode {
    fn analytic(self) -> bool {
        self != RunMode::Simulate
    }

    fn simulate(self) -> bool {
        self != RunMode::Analytic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCurve {
    pub scenario: String,
    pub metric: String,
    pub x: Vec<f64>,
    pub analytic: Vec<Option<f64>>,
    /// Set where the quadrature fallback produced the analytic value.
    pub semi_analytic: Vec<bool>,
    pub mc: Vec<Option<McEstimate>>,
}

impl MetricCurve {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn analytic_point(m: &MetricSpec, p: &EndToEndParams, ctx: &EvalContext) -> Result<(f64, bool)> {
    let det = DetectionConstant::for_detection(p.fso().detection);
    Ok(match *m {
        MetricSpec::Outage { threshold_db } => (outage_probability(db(threshold_db), p)?, false),
        MetricSpec::Ber { modulation } => {
            let v = average_ber(modulation, p, ctx, BerPath::Analytic)?;
            (v.value, v.semi_analytic)
        }
        MetricSpec::Capacity => {
            let v = ergodic_capacity(det, p, ctx)?;
            (v.value, v.semi_analytic)
        }
        MetricSpec::OutageCapacity { target } => (outage_capacity(target, det, p)?, false),
        MetricSpec::Moment { order } => {
            let v = e2e_moment(order, p, ctx)?;
            (v.value, v.semi_analytic)
        }
    })
}

fn mc_metric(m: &MetricSpec, p: &EndToEndParams) -> McMetric {
    let varpi = DetectionConstant::for_detection(p.fso().detection).varpi;
    match *m {
        MetricSpec::Outage { threshold_db } => McMetric::Outage { threshold: db(threshold_db) },
        MetricSpec::Ber { modulation } => McMetric::Ber { modulation },
        MetricSpec::Capacity => McMetric::Capacity { varpi },
        MetricSpec::OutageCapacity { target } => McMetric::OutageCapacity { target, varpi },
        MetricSpec::Moment { order } => McMetric::Moment { nu: order as f64 },
    }
}

/// Seed of the `index`-th sweep point, a SplitMix64 step away from `seed`.
fn point_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

type PointResult = Vec<(Option<(f64, bool)>, Option<McEstimate>)>;

fn run_point(cfg: &ScenarioConfig, index: usize, mode: RunMode, ctx: &EvalContext) -> Result<PointResult> {
    let x = cfg.sweep.values[index];
    let at = |metric: &str, e: Error| Error::AtPoint {
        scenario: cfg.label.clone(),
        metric: metric.into(),
        x,
        source: Box::new(e),
    };
    let p = cfg.params_at(x).map_err(|e| at("<parameters>", e))?;
    let records: Option<Vec<TrialRecord>> = if mode.simulate() && cfg.trials > 0 {
        Some(run_trials(&p, cfg.trials, point_seed(cfg.seed, index), None).map_err(|e| at("<simulation>", e))?)
    } else {
        None
    };
    cfg.metrics
        .iter()
        .map(|m| {
            let a = if mode.analytic() {
                Some(analytic_point(m, &p, ctx).map_err(|e| at(&m.name(), e))?)
            } else {
                None
            };
            let s = match &records {
                Some(r) => Some(estimate(mc_metric(m, &p), r, SinrForm::Approx).map_err(|e| at(&m.name(), e))?),
                None => None,
            };
            Ok((a, s))
        })
        .collect()
}

/// One curve per metric, points in sweep order. Points are evaluated in
/// parallel on `workers` threads (the global pool when `None`).
pub fn run_scenario(cfg: &ScenarioConfig, mode: RunMode, workers: Option<usize>) -> Result<Vec<MetricCurve>> {
    cfg.validate()?;
    let ctx = EvalContext {
        fallback: cfg.fallback,
        ..EvalContext::default()
    };
    let n = cfg.sweep.values.len();
    let run = || (0..n).into_par_iter().map(|i| run_point(cfg, i, mode, &ctx)).collect::<Result<Vec<_>>>();
    let points = match workers {
        None => run()?,
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?
            .install(run)?,
    };
    Ok(cfg
        .metrics
        .iter()
        .enumerate()
        .map(|(k, m)| MetricCurve {
            scenario: cfg.label.clone(),
            metric: m.name(),
            x: cfg.sweep.values.clone(),
            analytic: points.iter().map(|p| p[k].0.map(|v| v.0)).collect(),
            semi_analytic: points.iter().map(|p| p[k].0.is_some_and(|v| v.1)).collect(),
            mc: points.iter().map(|p| p[k].1).collect(),
        })
        .collect())
}

pub const CSV_HEADER: &str = "x,metric,analytic,semi_analytic,mc_mean,mc_se,mc_ci_low,mc_ci_high";

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_curve_csv<W: Write>(curve: &MetricCurve, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for i in 0..curve.len() {
        let mc = curve.mc[i];
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            curve.x[i],
            curve.metric,
            opt(curve.analytic[i]),
            if curve.analytic[i].is_some() { curve.semi_analytic[i].to_string() } else { String::new() },
            opt(mc.map(|m| m.mean)),
            opt(mc.map(|m| m.standard_error)),
            opt(mc.map(|m| m.ci95.0)),
            opt(mc.map(|m| m.ci95.1)),
        )?;
    }
    Ok(())
}

/// File name of a curve inside an output directory.
pub fn curve_file_name(curve: &MetricCurve) -> String {
    format!("{}_{}.csv", curve.scenario, curve.metric)
}

/// Writes one CSV per curve into `dir`; returns the file names.
pub fn write_curves(curves: &[MetricCurve], dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    curves
        .iter()
        .map(|c| {
            let name = curve_file_name(c);
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
            write_curve_csv(c, &mut f)?;
            f.flush()?;
            Ok(name)
        })
        .collect()
}

/// Pass rule: `|analytic − mc| ≤ max(abs_floor, z_max · SE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareThresholds {
    pub abs_floor: f64,
    pub z_max: f64,
}

impl Default for CompareThresholds {
    fn default() -> Self {
        Self {
            abs_floor: 0.01,
            z_max: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub scenario: String,
    pub metric: String,
    pub x: f64,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub scenario: String,
    pub metric: String,
    /// `sup_x |analytic − mc|`; for outage curves a KS distance on the grid.
    pub sup_abs_diff: f64,
    pub max_abs_z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub thresholds: CompareThresholds,
    pub points: Vec<PointCheck>,
    pub curves: Vec<CurveSummary>,
    pub max_abs_z: f64,
    pub pass: bool,
}

impl CompareReport {
    /// Failing points, in curve and sweep order.
    pub fn failures(&self) -> impl Iterator<Item = &PointCheck> {
        self.points.iter().filter(|p| !p.pass)
    }
}

/// Per-point z-scores of the analytic column against the simulation.
/// Points missing either column are skipped.
pub fn compare_report(curves: &[MetricCurve], th: CompareThresholds) -> CompareReport {
    let mut points = Vec::new();
    let mut summaries = Vec::new();
    for c in curves {
        let start = points.len();
        for i in 0..c.len() {
            let (Some(a), Some(m)) = (c.analytic[i], c.mc[i]) else { continue };
            let diff = a - m.mean;
            let z = if m.standard_error > 0.0 {
                diff / m.standard_error
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            points.push(PointCheck {
                scenario: c.scenario.clone(),
                metric: c.metric.clone(),
                x: c.x[i],
                analytic: a,
                mc_mean: m.mean,
                mc_se: m.standard_error,
                z,
                pass: diff.abs() <= th.abs_floor.max(th.z_max * m.standard_error),
            });
        }
        let mine = &points[start..];
        summaries.push(CurveSummary {
            scenario: c.scenario.clone(),
            metric: c.metric.clone(),
            sup_abs_diff: mine.iter().map(|p| (p.analytic - p.mc_mean).abs()).fold(0.0, f64::max),
            max_abs_z: mine.iter().map(|p| p.z.abs()).fold(0.0, f64::max),
            pass: mine.iter().all(|p| p.pass),
        });
    }
    CompareReport {
        thresholds: th,
        max_abs_z: points.iter().map(|p| p.z.abs()).fold(0.0, f64::max),
        pass: points.iter().all(|p| p.pass),
        points,
        curves: summaries,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedLink {
    pub a0: f64,
    pub xi: f64,
    pub w_leq: f64,
    pub beam_radius: f64,
    pub path_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub config: ScenarioConfig,
    /// Pointing and path-loss values at the first sweep point.
    pub derived: DerivedLink,
    pub files: Vec<String>,
}

/// Everything needed to rerun or diagnose a run. Contains no timestamps or
/// worker counts, so it is as reproducible as the CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub crate_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure_id: Option<String>,
    pub assumptions: Vec<String>,
    pub scenarios: Vec<ScenarioManifest>,
}

impl RunManifest {
    pub fn new(preset: Option<&FigurePreset>) -> Self {
        let mut assumptions: Vec<String> = UNSTATED_DEFAULTS.iter().map(|s| s.to_string()).collect();
        if let Some(p) = preset {
            assumptions.extend(p.notes.iter().cloned());
        }
        Self {
            schema_version: super::config::SCHEMA_VERSION,
            crate_version: env!("CARGO_PKG_VERSION").into(),
            figure_id: preset.map(|p| p.id.to_string()),
            assumptions,
            scenarios: Vec::new(),
        }
    }

    pub fn add(&mut self, cfg: &ScenarioConfig, files: Vec<String>) -> Result<()> {
        let geom = cfg.geometry_at(cfg.sweep.values[0]);
        let pc = crate::channel::derive_pointing_coefficients(&geom)?;
        self.scenarios.push(ScenarioManifest {
            config: cfg.clone(),
            derived: DerivedLink {
                a0: pc.a0,
                xi: pc.xi,
                w_leq: pc.w_leq,
                beam_radius: pc.w_l,
                path_loss: crate::channel::path_loss(&geom),
            },
            files,
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }
}

/// Process exit status for an error: 2 for configuration and usage
/// problems, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::AtPoint { source, .. } => exit_code(source),
        Error::Config { .. } | Error::Usage(_) | Error::Json(_) | Error::Io(_) => 2,
        _ => 3,
    }
}
