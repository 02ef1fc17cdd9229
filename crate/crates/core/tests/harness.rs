use rfso::channel::Detection;
use rfso::harness::*;
use rfso::metrics::{ergodic_capacity_semi_analytic, outage_probability, DetectionConstant};
use rfso::monte_carlo::McEstimate;
use rfso::Error;

fn config_error(json: &str) -> (String, String) {
    match ScenarioConfig::from_json(json) {
        Err(Error::Config { field, reason }) => (field, reason),
        other => panic!("expected a config error for {json}, got {other:?}"),
    }
}

#[test]
fn empty_config_is_reference_link() {
    let c = ScenarioConfig::from_json("{}").unwrap();
    assert_eq!(c, ScenarioConfig::default());
    let g = &c.geometry;
    assert_eq!(
        (g.link_length, g.wavelength, g.curvature_radius, g.aperture_radius, g.beam_waist, g.jitter_sigma, g.attenuation),
        (1000.0, 1550e-9, -10.0, 0.05, 0.005, 0.0375, 0.5)
    );
    assert_eq!((c.turbulence.p, c.turbulence.q, c.turbulence.m1, c.turbulence.m2), (2, 2, 3, 3));
    assert_eq!((c.interference.count, c.interference.shape), (5, 5));
    assert_eq!(c.schema_version, SCHEMA_VERSION);
    let p = c.params_at(20.0).unwrap();
    assert!((p.fso().a0 - 0.0187).abs() < 1e-4);
    assert!((p.fso().xi - 6.89).abs() < 0.01);
    assert!((p.fso().path_loss - 10f64.powf(-0.05)).abs() < 1e-15);
}

#[test]
fn config_rejections_name_the_field() {
    let (f, r) = config_error(r#"{"turbulence": {"p": 3, "q": 2, "alpha1": 2.0, "alpha2": 1.0}}"#);
    assert!(f.contains("p/q") && r.contains("alpha1/alpha2"), "{f}: {r}");
    let (f, _) = config_error(r#"{"rf": {"m_sr": 1.5}}"#);
    assert_eq!(f, "rf.m_sr");
    let (f, _) = config_error(r#"{"interference": {"shape": 2.5}}"#);
    assert_eq!(f, "interference.shape");
    let (f, r) = config_error(r#"{"rf": {"m_sr": 2, "relay": 3}}"#);
    assert!(f.starts_with("rf") && r.contains("relay"), "{f}: {r}");
    let (f, _) = config_error(r#"{"schema_version": 2}"#);
    assert_eq!(f, "schema_version");
    let (f, _) = config_error(r#"{"sweep": {"axis": "snr_db", "values": []}}"#);
    assert_eq!(f, "sweep.values");
    let (f, _) = config_error(r#"{"sweep": {"axis": "rho", "values": [0.5, 1.5]}}"#);
    assert_eq!(f, "rf.rho");
    let (f, _) = config_error(r#"{"rf": {"relays": 2, "m_sel": 3}}"#);
    assert_eq!(f, "rf.m_sel");
    assert!(matches!(ScenarioConfig::from_json("{"), Err(Error::Config { .. })));
    assert!(matches!(load_config(std::path::Path::new("/nonexistent/x.json")), Err(Error::Config { .. })));
}

#[test]
fn config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    for cfg in FigureId::ALL.into_iter().flat_map(|f| figure_preset(f).scenarios).chain([ScenarioConfig::default()]) {
        cfg.save(&path).unwrap();
        assert_eq!(load_config(&path).unwrap(), cfg);
    }
    let partial = r#"{"label": "x", "geometry": {"attenuation": 7.0}, "metrics": [{"kind": "capacity"}, {"kind": "ber", "modulation": "DBPSK"}]}"#;
    let c = ScenarioConfig::from_json(partial).unwrap();
    assert_eq!(c.geometry.attenuation, 7.0);
    assert_eq!(c.geometry.jitter_sigma, 0.0375);
    assert_eq!(c.metrics[1].name(), "ber_dbpsk");
}

#[test]
fn presets_touch_only_their_fields() {
    for id in FigureId::ALL {
        let preset = figure_preset(id);
        assert!(!preset.scenarios.is_empty());
        for s in &preset.scenarios {
            s.validate().unwrap();
            assert_eq!(s.figure_id, Some(id));
            assert_eq!(s.interference.shape, 5);
            assert_eq!(s.geometry.link_length, 1000.0);
        }
        assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
    }
    assert!("fig10".parse::<FigureId>().is_err());
    assert!(figure_preset(FigureId::Fig2).scenarios.iter().all(|s| s.rf.m_sr == 1));
    let a: Vec<(f64, f64)> = figure_preset(FigureId::Fig9)
        .scenarios
        .iter()
        .map(|s| (s.turbulence.alpha1, s.turbulence.alpha2))
        .collect();
    assert_eq!(a, vec![(4.0, 2.0), (3.0, 1.5), (0.5, 0.25)]);
}

fn analytic_only(mut cfg: ScenarioConfig, xs: &[f64]) -> MetricCurve {
    cfg.sweep.values = xs.to_vec();
    cfg.trials = 0;
    run_scenario(&cfg, RunMode::Analytic, None).unwrap().remove(0)
}

#[test]
fn fig2_stronger_interference_raises_outage() {
    let xs = [10.0, 20.0, 25.0, 30.0, 35.0];
    let curves: Vec<Vec<f64>> = figure_preset(FigureId::Fig2)
        .scenarios
        .into_iter()
        .map(|s| analytic_only(s, &xs).analytic.into_iter().map(Option::unwrap).collect())
        .collect();
    // scenarios are ordered from no interference to the strongest
    for w in curves.windows(2) {
        for i in 0..xs.len() {
            assert!(w[1][i] >= w[0][i], "x = {}: {} < {}", xs[i], w[1][i], w[0][i]);
        }
        assert!(w[1][3] > w[0][3]);
    }
}

#[test]
fn fig3_heterodyne_beats_imdd_with_small_pointing_error() {
    let s = figure_preset(FigureId::Fig3).scenarios;
    let het = s.iter().find(|c| c.label == "het_s3.75cm").unwrap();
    let imdd = s.iter().find(|c| c.label == "imdd_s3.75cm").unwrap();
    let xs = [20.0, 30.0, 40.0];
    let a = analytic_only(het.clone(), &xs);
    let b = analytic_only(imdd.clone(), &xs);
    for i in 0..xs.len() {
        assert!(a.analytic[i].unwrap() < b.analytic[i].unwrap());
    }
}

#[test]
fn fig6_capacity_increases_with_correlation() {
    let det = DetectionConstant::for_detection(Detection::Heterodyne);
    for x in [20.0, 40.0] {
        let c: Vec<f64> = figure_preset(FigureId::Fig6)
            .scenarios
            .iter()
            .map(|s| ergodic_capacity_semi_analytic(det, &s.params_at(x).unwrap()).unwrap())
            .collect();
        assert!(c.windows(2).all(|w| w[1] > w[0]), "{c:?}");
    }
}

fn curve(analytic: &[f64], mc: &[(f64, f64)]) -> MetricCurve {
    MetricCurve {
        scenario: "t".into(),
        metric: "m".into(),
        x: (0..analytic.len()).map(|i| i as f64).collect(),
        analytic: analytic.iter().map(|&a| Some(a)).collect(),
        semi_analytic: vec![false; analytic.len()],
        mc: mc
            .iter()
            .map(|&(mean, se)| Some(McEstimate { mean, standard_error: se, trials: 100, ci95: (mean - 1.96 * se, mean + 1.96 * se) }))
            .collect(),
    }
}

#[test]
fn compare_report_examples() {
    let same = curve(&[0.5, 0.2, 0.1], &[(0.5, 0.02), (0.2, 0.02), (0.1, 0.02)]);
    let r = compare_report(&[same], CompareThresholds::default());
    assert!(r.pass);
    assert!(r.points.iter().all(|p| p.z == 0.0));
    assert_eq!(r.max_abs_z, 0.0);

    let shifted = curve(&[0.5, 0.4, 0.1], &[(0.5, 0.02), (0.2, 0.02), (0.1, 0.02)]);
    let r = compare_report(&[shifted], CompareThresholds::default());
    assert!(!r.pass);
    let bad: Vec<&PointCheck> = r.failures().collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].x, 1.0);
    assert!((bad[0].z - 10.0).abs() < 1e-9);
    assert!(!r.curves[0].pass);
    assert!((r.curves[0].sup_abs_diff - 0.2).abs() < 1e-12);

    // a zero-variance estimate that disagrees gets an infinite score
    let r = compare_report(&[curve(&[0.3], &[(0.0, 0.0)])], CompareThresholds::default());
    assert!(r.points[0].z.is_infinite() && !r.pass);
}

#[test]
fn baseline_run_passes_compare() {
    let cfg = ScenarioConfig {
        trials: 100_000,
        seed: 3,
        ..ScenarioConfig::default()
    };
    let curves = run_scenario(&cfg, RunMode::Both, None).unwrap();
    assert_eq!(curves.len(), 1);
    let c = &curves[0];
    assert_eq!(c.len(), 8);
    assert!(c.analytic.iter().all(Option::is_some) && c.mc.iter().all(Option::is_some));
    let r = compare_report(&curves, CompareThresholds::default());
    assert!(r.pass, "{:?}", r.failures().collect::<Vec<_>>());
    // analytic column is the closed form at each point
    let p = cfg.params_at(25.0).unwrap();
    assert_eq!(c.analytic[5].unwrap(), outage_probability(10f64.powf(0.5), &p).unwrap());
}

#[test]
fn csv_is_reproducible_and_ordered() {
    let cfg = ScenarioConfig {
        trials: 2_000,
        seed: 9,
        metrics: vec![MetricSpec::Outage { threshold_db: 5.0 }, MetricSpec::Moment { order: 1 }],
        ..ScenarioConfig::default()
    };
    let dump = |workers| {
        let curves = run_scenario(&cfg, RunMode::Simulate, Some(workers)).unwrap();
        let mut out = Vec::new();
        for c in &curves {
            write_curve_csv(c, &mut out).unwrap();
        }
        (curves, String::from_utf8(out).unwrap())
    };
    let (curves, a) = dump(1);
    let (_, b) = dump(3);
    assert_eq!(a, b);
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines[1].split(',').count(), 8);
    // simulate mode leaves the analytic columns empty
    assert!(lines[1].starts_with("0,outage_5db,,,"));
    let xs: Vec<f64> = lines[1..9].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(xs, cfg.sweep.values);
    assert_eq!(curve_file_name(&curves[1]), "baseline_moment_1.csv");

    let other = ScenarioConfig { seed: 10, ..cfg.clone() };
    let c2 = run_scenario(&other, RunMode::Simulate, Some(1)).unwrap();
    assert_ne!(c2[0].mc, curves[0].mc);
}

#[test]
fn manifest_lists_assumptions_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let preset = figure_preset(FigureId::Fig5);
    let mut m = RunManifest::new(Some(&preset));
    m.add(&preset.scenarios[2], vec!["a.csv".into()]).unwrap();
    let path = m.write(dir.path()).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["figure_id"], "fig5");
    assert_eq!(v["scenarios"][0]["files"][0], "a.csv");
    let pl = v["scenarios"][0]["derived"]["path_loss"].as_f64().unwrap();
    assert!((pl - 10f64.powf(-0.7)).abs() < 1e-12);
    assert!(v["assumptions"].as_array().unwrap().len() > UNSTATED_DEFAULTS.len());
}

#[test]
fn errors_carry_point_and_exit_code() {
    let cfg = ScenarioConfig {
        trials: 0,
        metrics: vec![MetricSpec::Capacity],
        sweep: Sweep { axis: SweepAxis::SnrDb, values: vec![20.0] },
        fallback: rfso::sinr::Fallback::Forbid,
        ..ScenarioConfig::default()
    };
    // the analytic capacity fits the default budgets, so this succeeds
    assert!(run_scenario(&cfg, RunMode::Analytic, None).is_ok());
    let e = Error::AtPoint {
        scenario: "s".into(),
        metric: "capacity".into(),
        x: 20.0,
        source: Box::new(Error::CostGuard { nodes: 10, budget: 1 }),
    };
    assert_eq!(exit_code(&e), 3);
    assert!(e.to_string().contains("x = 20"));
    assert_eq!(exit_code(&Error::Config { field: "a".into(), reason: "b".into() }), 2);
    assert_eq!(exit_code(&Error::Domain("d".into())), 3);
}
