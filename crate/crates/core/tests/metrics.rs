mod common;

use rfso::channel::{Detection, FsoLinkParams, InterferenceParams, RfLinkParams};
use rfso::metrics::*;
use rfso::sinr::{e2e_cdf, EndToEndParams, EvalContext};
use rfso::Error;

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Both hops driven by the same SNR figure.
fn at(snr_db: f64) -> EndToEndParams {
    common::params(2, db(snr_db), db(snr_db), 5)
}

fn with_fso(m_sr: u32, rho: f64, fso: FsoLinkParams, snr_db: f64) -> EndToEndParams {
    let mut f = fso;
    f.mu_r = db(snr_db);
    EndToEndParams::new(
        RfLinkParams::new(m_sr, db(snr_db), 3, 3, rho).unwrap(),
        InterferenceParams::uniform(5, 1, 10.0).unwrap(),
        f,
    )
    .unwrap()
}

#[test]
fn outage_endpoints() {
    let p = at(20.0);
    assert_eq!(outage_probability(0.0, &p).unwrap(), 0.0);
    assert_eq!(outage_probability(f64::INFINITY, &p).unwrap(), 1.0);
    assert!((outage_probability(1e12, &p).unwrap() - 1.0).abs() < 1e-9);
    assert!(matches!(outage_probability(-1.0, &p), Err(Error::Domain(_))));
}

#[test]
fn diversity_gain_examples() {
    let mut f = common::fso(Detection::ImDd, 1.0);
    f.xi = 1.0;
    f.alpha1 = 3.0;
    f.alpha2 = 1.5;
    f.p = 2;
    f.q = 1;
    let p = with_fso(1, 0.9, f.clone(), 20.0);
    assert!((diversity_gain(&p) - 0.5).abs() < 1e-12);

    let mut g = common::fso(Detection::Heterodyne, 1.0);
    g.xi = 1e3;
    g.alpha1 = 3.0;
    g.alpha2 = 3.0;
    let p = with_fso(1, 0.9, g.clone(), 20.0);
    assert_eq!(diversity_gain(&p), 1.0);

    let lo = with_fso(1, 0.1, g.clone(), 20.0);
    let hi = with_fso(1, 0.9, g, 20.0);
    assert_eq!(diversity_gain(&lo), diversity_gain(&hi));
}

#[test]
fn asymptote_converges_to_exact() {
    let gt = db(5.0);
    for (m_sr, xi) in [(2, common::XI), (3, 0.9)] {
        let mut f = common::fso(Detection::Heterodyne, 1.0);
        f.xi = xi;
        let p = with_fso(m_sr, 0.9, f, 60.0);
        let exact = outage_probability(gt, &p).unwrap();
        let asym = asymptotic_outage(gt, &p).unwrap();
        let ratio = asym / exact;
        assert!((ratio - 1.0).abs() < 0.1, "m_SR {m_sr}, ξ {xi}: {asym} vs {exact}");
    }
}

#[test]
fn outage_slope_matches_diversity_gain() {
    // pointing-limited: ξ² = 0.81 < m_SR = 2
    let mut f = common::fso(Detection::Heterodyne, 1.0);
    f.xi = 0.9;
    let gt = db(5.0);
    let pts: Vec<(f64, f64)> = [50.0, 55.0, 60.0, 65.0, 70.0]
        .iter()
        .map(|&s| (s / 10.0, outage_probability(gt, &with_fso(2, 0.9, f.clone(), s)).unwrap().log10()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = -sxy / sxx;
    let gd = diversity_gain(&with_fso(2, 0.9, f, 60.0));
    assert!((slope / gd - 1.0).abs() < 0.1, "slope {slope} vs G_d {gd}");
}

#[test]
fn ber_low_snr_limit_is_one_half() {
    let p = common::params(2, 1e-6, 1e-6, 5);
    let ctx = EvalContext::default();
    for m in ModulationScheme::ALL {
        let v = average_ber(m, &p, &ctx, BerPath::Analytic).unwrap().value;
        assert!((v - 0.5).abs() < 1e-3, "{m:?}: {v}");
    }
}

#[test]
fn ber_ordering_and_quadrature_agreement() {
    // mid-range: the optical hop sits ~18 dB below the sweep value
    let p = at(30.0);
    let ctx = EvalContext::default();
    let ber = |m| average_ber(m, &p, &ctx, BerPath::Analytic).unwrap().value;
    let (cbpsk, dbpsk, cbfsk, nbfsk) = (
        ber(ModulationScheme::Cbpsk),
        ber(ModulationScheme::Dbpsk),
        ber(ModulationScheme::Cbfsk),
        ber(ModulationScheme::Nbfsk),
    );
    assert!(cbpsk < dbpsk && dbpsk <= cbfsk && cbfsk < nbfsk, "{cbpsk} {dbpsk} {cbfsk} {nbfsk}");
    for m in ModulationScheme::ALL {
        let q = average_ber_quadrature(m, &p).unwrap();
        assert!((ber(m) - q).abs() < 1e-5, "{m:?}");
    }
}

#[test]
fn dbpsk_matches_quadrature_at_25_db() {
    let p = at(25.0);
    let ctx = EvalContext::default();
    let a = average_ber(ModulationScheme::Dbpsk, &p, &ctx, BerPath::Analytic).unwrap();
    let q = average_ber(ModulationScheme::Dbpsk, &p, &ctx, BerPath::Quadrature).unwrap();
    assert!(!a.semi_analytic && q.semi_analytic);
    assert!((a.value - q.value).abs() < 1e-7 * q.value.max(1e-3), "{} vs {}", a.value, q.value);
}

#[test]
fn ber_nonincreasing_in_snr() {
    let ctx = EvalContext::default();
    for m in [ModulationScheme::Cbpsk, ModulationScheme::Nbfsk] {
        let curve: Vec<f64> = (0..8)
            .map(|k| average_ber(m, &at(5.0 * k as f64), &ctx, BerPath::Analytic).unwrap().value)
            .collect();
        assert!(curve.windows(2).all(|w| w[1] <= w[0]), "{m:?}: {curve:?}");
    }
}

#[test]
fn conditional_error_matches_incomplete_gamma_form() {
    // Γ(1/2, x)/Γ(1/2) = erfc(√x)
    let g = 0.7;
    assert!((ModulationScheme::Cbpsk.conditional_error(g) - 0.5 * libm::erfc(g.sqrt())).abs() < 1e-15);
    assert!((ModulationScheme::Nbfsk.conditional_error(g) - 0.5 * (-0.5 * g).exp()).abs() < 1e-15);
    assert_eq!("dbpsk".parse::<ModulationScheme>().unwrap(), ModulationScheme::Dbpsk);
    assert!("qpsk".parse::<ModulationScheme>().is_err());
}

#[test]
fn capacity_matches_semi_analytic() {
    let det = DetectionConstant::for_detection(Detection::Heterodyne);
    let p = at(20.0);
    let ctx = EvalContext::default();
    let a = ergodic_capacity(det, &p, &ctx).unwrap();
    let s = ergodic_capacity_semi_analytic(det, &p).unwrap();
    assert!(!a.semi_analytic);
    assert!((a.value - s).abs() < 1e-5, "{} vs {s}", a.value);
}

#[test]
fn capacity_fallback_is_flagged() {
    let det = DetectionConstant::for_detection(Detection::ImDd);
    let p = at(20.0);
    let mut ctx = EvalContext::default();
    ctx.trivariate.budget = 10;
    let v = ergodic_capacity(det, &p, &ctx).unwrap();
    assert!(v.semi_analytic);
    assert!((v.value - ergodic_capacity_semi_analytic(det, &p).unwrap()).abs() < 1e-12);
    ctx.fallback = rfso::sinr::Fallback::Forbid;
    assert!(matches!(ergodic_capacity(det, &p, &ctx), Err(Error::CostGuard { .. })));
}

#[test]
fn capacity_nondecreasing_in_snr() {
    let det = DetectionConstant::for_detection(Detection::Heterodyne);
    let c: Vec<f64> = [0.0, 10.0, 20.0, 30.0, 40.0]
        .iter()
        .map(|&s| ergodic_capacity_semi_analytic(det, &at(s)).unwrap())
        .collect();
    assert!(c.windows(2).all(|w| w[1] >= w[0]), "{c:?}");
    // and in μ_r alone
    let lo = ergodic_capacity_semi_analytic(det, &common::params(2, db(30.0), db(20.0), 5)).unwrap();
    let hi = ergodic_capacity_semi_analytic(det, &common::params(2, db(30.0), db(30.0), 5)).unwrap();
    assert!(hi >= lo);
}

#[test]
fn outage_capacity_identity_and_monotonicity() {
    let p = at(20.0);
    for det in [Detection::Heterodyne, Detection::ImDd].map(DetectionConstant::for_detection) {
        assert_eq!(outage_capacity(0.0, det, &p).unwrap(), 0.0);
        let mut prev = 0.0;
        for ct in [0.5, 1.0, 2.0, 3.0, 4.0] {
            let v = outage_capacity(ct, det, &p).unwrap();
            assert_eq!(v, outage_probability((2f64.powf(ct) - 1.0) / det.varpi, &p).unwrap());
            assert_eq!(v, e2e_cdf((2f64.powf(ct) - 1.0) / det.varpi, &p).unwrap());
            assert!(v >= prev);
            prev = v;
        }
    }
}

#[test]
fn detection_constants() {
    assert_eq!(DetectionConstant::for_detection(Detection::Heterodyne).varpi, 1.0);
    let v = DetectionConstant::for_detection(Detection::ImDd).varpi;
    assert!((v - std::f64::consts::E / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
}
