use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rfso::error::{Error, Result};
use rfso::harness::{
    compare_report, exit_code, figure_preset, load_config, run_scenario, write_curves, CompareThresholds, FigureId,
    MetricCurve, RunManifest, RunMode, ScenarioConfig,
};
use rfso::sinr::Fallback;
use rfso::specfun::{fox_h, meijer_g, tricomi_u, EvalOptions, FoxHSpec, MeijerGSpec};

#[derive(Parser)]
#[command(name = "rfso", version, about = "Mixed RF/FSO relaying: closed forms, simulation and figure data")]
struct Cli {
    /// Scenario JSON; absent sections take the reference defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per sweep point.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    fallback: Option<FallbackArg>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FallbackArg {
    Allow,
    Forbid,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte Carlo columns only.
    Simulate,
    /// Closed-form columns only.
    Analytic,
    /// Both paths plus a z-score report; exit status 4 when a point fails.
    Compare,
    /// Data behind one figure (fig2..fig9).
    Figure { id: String },
    /// Special-function utilities.
    Specfn {
        #[command(subcommand)]
        cmd: SpecfnCmd,
    },
}

#[derive(Subcommand)]
enum SpecfnCmd {
    /// Evaluate a JSON spec (from --config, the argument, or stdin).
    Eval { spec: Option<String> },
}

#[derive(Deserialize)]
#[serde(tag = "function", rename_all = "snake_case", deny_unknown_fields)]
enum SpecfnRequest {
    MeijerG {
        spec: MeijerGSpec,
        #[serde(default = "default_tol")]
        tolerance: f64,
    },
    FoxH {
        spec: FoxHSpec,
        #[serde(default = "default_tol")]
        tolerance: f64,
        #[serde(default)]
        budget: Option<usize>,
    },
    TricomiU {
        a: f64,
        b: f64,
        z: f64,
    },
}

fn default_tol() -> f64 {
    1e-10
}

fn apply_flags(cli: &Cli, cfg: &mut ScenarioConfig) {
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.trials {
        cfg.trials = n;
    }
    if let Some(f) = cli.fallback {
        cfg.fallback = match f {
            FallbackArg::Allow => Fallback::Allow,
            FallbackArg::Forbid => Fallback::Forbid,
        };
    }
}

fn print_curves(curves: &[MetricCurve]) {
    for c in curves {
        println!("# {} / {}", c.scenario, c.metric);
        for i in 0..c.len() {
            let a = c.analytic[i].map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
            let m = c.mc[i]
                .map(|m| format!("{:.6e} ± {:.2e}", m.mean, m.standard_error))
                .unwrap_or_else(|| "-".into());
            let flag = if c.semi_analytic[i] { " (semi-analytic)" } else { "" };
            println!("{:>8}  analytic {a}{flag}  mc {m}", c.x[i]);
        }
    }
}

fn run_configs(cli: &Cli, configs: Vec<ScenarioConfig>, mode: RunMode, manifest: &mut RunManifest, dir: &Path) -> Result<Vec<MetricCurve>> {
    let mut all = Vec::new();
    for mut cfg in configs {
        apply_flags(cli, &mut cfg);
        let curves = run_scenario(&cfg, mode, cli.workers)?;
        let files = write_curves(&curves, dir)?;
        manifest.add(&cfg, files)?;
        all.extend(curves);
    }
    manifest.write(dir)?;
    Ok(all)
}

fn specfn_eval(cli: &Cli, arg: &Option<String>) -> Result<()> {
    let text = match (arg, &cli.config) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config { field: "<file>".into(), reason: format!("cannot read {}: {e}", p.display()) })?,
        (None, None) => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let req: SpecfnRequest = serde_json::from_str(&text)
        .map_err(|e| Error::Config { field: "specfn".into(), reason: e.to_string() })?;
    let (value, error) = match req {
        SpecfnRequest::MeijerG { spec, tolerance } => {
            spec.validate()?;
            let v = meijer_g(&spec, tolerance)?;
            (v.value, v.error)
        }
        SpecfnRequest::FoxH { spec, tolerance, budget } => {
            let mut opts = EvalOptions { tolerance, ..EvalOptions::default() };
            if let Some(b) = budget {
                opts.budget = b;
            }
            let v = fox_h(&spec, opts)?;
            (v.value, v.error)
        }
        SpecfnRequest::TricomiU { a, b, z } => (tricomi_u(a, b, z)?, 0.0),
    };
    println!("{}", serde_json::json!({ "value": value, "error": error }));
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let mode = match &cli.cmd {
        Cmd::Simulate => RunMode::Simulate,
        Cmd::Analytic => RunMode::Analytic,
        Cmd::Compare => RunMode::Both,
        Cmd::Figure { id } => {
            let preset = figure_preset(id.parse::<FigureId>()?);
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(preset.id.name()));
            let mut manifest = RunManifest::new(Some(&preset));
            let curves = run_configs(cli, preset.scenarios.clone(), RunMode::Both, &mut manifest, &dir)?;
            print_curves(&curves);
            println!("wrote {}", dir.display());
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::Specfn { cmd: SpecfnCmd::Eval { spec } } => {
            specfn_eval(cli, spec)?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => ScenarioConfig::default(),
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.label));
    let mut manifest = RunManifest::new(None);
    let curves = run_configs(cli, vec![cfg], mode, &mut manifest, &dir)?;
    print_curves(&curves);
    println!("wrote {}", dir.display());
    if mode == RunMode::Both {
        let report = compare_report(&curves, CompareThresholds::default());
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        for c in &report.curves {
            println!(
                "{} {} / {}: sup|diff| {:.3e}, max|z| {:.2}",
                if c.pass { "PASS" } else { "FAIL" },
                c.scenario,
                c.metric,
                c.sup_abs_diff,
                c.max_abs_z
            );
        }
        for p in report.failures() {
            println!("  failing point x = {}: analytic {:.6e}, mc {:.6e} ± {:.2e} (z = {:.2})", p.x, p.analytic, p.mc_mean, p.mc_se, p.z);
        }
        if !report.pass {
            return Ok(ExitCode::from(4));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
