//! Scenario configs, sweeps over the analytic and simulation paths, CSV
//! output and figure presets.

mod config;
mod presets;
mod run;

pub use config::{
    load_config, InterferenceConfig, MetricSpec, RfConfig, ScenarioConfig, Sweep, SweepAxis, TurbulenceConfig,
    SCHEMA_VERSION, UNSTATED_DEFAULTS,
};
pub use presets::{figure_preset, FigureId, FigurePreset};
pub use run::{
    compare_report, curve_file_name, exit_code, run_scenario, write_curve_csv, write_curves, CompareReport,
    CompareThresholds, CurveSummary, DerivedLink, MetricCurve, PointCheck, RunManifest, RunMode, ScenarioManifest,
    CSV_HEADER,
};
