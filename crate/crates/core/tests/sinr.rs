mod common;

use proptest::prelude::*;
use rfso::channel::{inr_pdf, InterferenceParams, RfLinkParams, SelectedSnrTable};
use rfso::quadrature::{integrate_half_line, log_breaks};
use rfso::sinr::*;
use rfso::specfun::EvalOptions;

fn mass(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    integrate_half_line(f, &log_breaks(lo, hi, 3), tol, 1e-15).unwrap().value
}

#[test]
fn combiner_examples() {
    assert!((e2e_sinr_exact(5.0f64, 3.0, 0.0) - 15.0 / 9.0).abs() < 1e-15);
    assert_eq!(e2e_sinr_approx(5.0, 3.0, 0.0), 3.0);
    let g = 4.0f64;
    assert!((e2e_sinr_exact(g, g, 0.0) - g * g / (2.0 * g + 1.0)).abs() < 1e-15);
    assert!((e2e_sinr_approx(5.0f32, 1e30, 1.0) - 2.5).abs() < 1e-6);
}

proptest! {
    #[test]
    fn combiner_forms_agree_and_min_dominates(g1 in 0.0f64..1e4, g2 in 0.0f64..1e4, gr in 0.0f64..50.0) {
        let exact = e2e_sinr_exact(g1, g2, gr);
        let eff = g1 / (gr + 1.0);
        let alt = eff * g2 / (eff + g2 + 1.0);
        prop_assert!((exact - alt).abs() <= 1e-12 * (1.0 + exact));
        prop_assert!(exact <= e2e_sinr_approx(g1, g2, gr) + 1e-12);
    }
}

#[test]
fn effective_cdf_matches_averaging_integral() {
    let p = common::params(2, 100.0, 1e4, 5);
    let rf = p.rf().clone();
    let sel = SelectedSnrTable::new(&rf).unwrap();
    let intf = p.interference().clone();
    for g in [0.05, 1.0, 50.0, 400.0] {
        let oracle = mass(|x| sel.cdf(g * (1.0 + x)) * inr_pdf(x, &intf), 1e-6, 1e2, 1e-12);
        let v = effective_snr_cdf(g, &p).unwrap();
        assert!((v - oracle).abs() < 1e-9, "g={g}: {v} vs {oracle}");
        let s = p.table().unwrap().survival(g);
        assert!((1.0 - s - oracle).abs() < 1e-9);
    }
}

#[test]
fn effective_density_consistent() {
    let p = common::params(2, 30.0, 1e4, 5);
    let total = mass(|g| effective_snr_pdf(g, &p).unwrap(), 1e-6, 1e4, 1e-10);
    assert!((total - 1.0).abs() < 1e-7);
    for g in [0.3, 5.0, 40.0] {
        let h = 1e-5 * g;
        let d = (effective_snr_cdf(g + h, &p).unwrap() - effective_snr_cdf(g - h, &p).unwrap()) / (2.0 * h);
        assert!((d / effective_snr_pdf(g, &p).unwrap() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn weak_interference_limit() {
    // β_R → ∞ sends the INR to zero
    let rf = RfLinkParams::new(2, 20.0, 3, 3, 0.9).unwrap();
    let p = EndToEndParams::new(rf.clone(), InterferenceParams::uniform(5, 1, 1e9).unwrap(), common::fso(rfso::channel::Detection::Heterodyne, 1e3)).unwrap();
    let sel = SelectedSnrTable::new(&rf).unwrap();
    for g in [0.5, 10.0, 60.0] {
        assert!((effective_snr_cdf(g, &p).unwrap() - sel.cdf(g)).abs() < 1e-7);
    }
}

#[test]
fn single_exponential_reduction() {
    let rf = RfLinkParams::new(1, 4.0, 1, 1, 0.5).unwrap();
    let p = EndToEndParams::new(rf, InterferenceParams::none(), common::fso(rfso::channel::Detection::Heterodyne, 1e3)).unwrap();
    for g in [0.0, 0.5, 3.0] {
        assert!((effective_snr_pdf(g, &p).unwrap() - 0.25 * (-g / 4.0f64).exp()).abs() < 1e-15);
    }
}

#[test]
fn e2e_cdf_algebra_and_bounds() {
    let p = common::params(2, 100.0, 1e4, 5);
    assert_eq!(e2e_cdf(0.0, &p).unwrap(), 0.0);
    for g in [0.1, 2.0, 30.0, 300.0] {
        let f1 = effective_snr_cdf(g, &p).unwrap();
        let f2 = rfso::channel::fso_snr_cdf(g, p.fso()).unwrap();
        let f = e2e_cdf(g, &p).unwrap();
        assert!((f - (f1 + f2 - f1 * f2)).abs() < 1e-14);
        assert!(f >= f1.max(f2) - 1e-14);
        assert!((1.0 - f - e2e_ccdf(g, &p).unwrap()).abs() < 1e-9);
    }
    assert!((e2e_cdf(1e9, &p).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn e2e_pdf_integrates_to_one() {
    let p = common::params(2, 100.0, 1e4, 5);
    let total = mass(|g| e2e_pdf(g, &p).unwrap(), 1e-6, 1e5, 1e-9);
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn block_log_laplace_reference() {
    let b = Block { power: 0.0, decay: 1.0, rate: 1.0, shift: 0, log: Some(1.0), hop: HopFactor::One };
    let fso = common::fso(rfso::channel::Detection::Heterodyne, 1e3);
    let v = b.evaluate(1.0, &fso, EvalOptions::default()).unwrap();
    assert!((v.value - 0.596347362323194074).abs() < 1e-10);
}

#[test]
fn blocks_match_quadrature() {
    let fso = common::fso(rfso::channel::Detection::ImDd, 2e4);
    let beta = 10.0;
    let opts = EvalOptions { tolerance: 1e-8, ..Default::default() };
    let hops = [HopFactor::One, HopFactor::Cdf, HopFactor::Pdf];
    for hop in hops {
        for (shift, log) in [(0, None), (5, None), (0, Some(1.0)), (6, Some(1.0))] {
            if hop == HopFactor::One && log.is_none() {
                continue;
            }
            let opts = if shift > 0 && log.is_some() && hop != HopFactor::One {
                EvalOptions { tolerance: 1e-5, ..Default::default() }
            } else {
                opts
            };
            let b = Block { power: 2.0, decay: 0.07, rate: 0.05, shift, log, hop };
            let v = b.evaluate(beta, &fso, opts).unwrap();
            let q = b
                .quadrature(beta, |g| match hop {
                    HopFactor::Cdf => rfso::channel::fso_snr_cdf(g, &fso),
                    HopFactor::Pdf => rfso::channel::fso_snr_pdf(g, &fso),
                    HopFactor::One => Ok(1.0),
                }, 1e-10)
                .unwrap();
            assert!((v.value / q - 1.0).abs() < 10.0 * opts.tolerance, "{hop:?} {shift} {log:?}: {} vs {q}", v.value);
        }
    }
}

#[test]
fn large_shift_blocks_match_quadrature() {
    // many high-shape interferers put the binomial poles far from the origin
    let fso = common::fso(rfso::channel::Detection::Heterodyne, 100.0);
    let opts = EvalOptions { tolerance: 1e-7, ..Default::default() };
    for shift in [20, 25, 30] {
        let b = Block { power: 0.0, decay: 1.0, rate: 0.5, shift, log: None, hop: HopFactor::Cdf };
        let v = b.evaluate(10.0, &fso, opts).unwrap().value;
        let q = b.quadrature(10.0, |g| rfso::channel::fso_snr_cdf(g, &fso), 1e-10).unwrap();
        assert!((v / q - 1.0).abs() < 1e-6, "shift {shift}: {v} vs {q}");
    }
}

#[test]
fn tricomi_block_matches_quadrature() {
    let fso = common::fso(rfso::channel::Detection::Heterodyne, 1e3);
    let b = Block { power: 3.0, decay: 0.4, rate: 0.3, shift: 7, log: None, hop: HopFactor::One };
    let v = b.evaluate(10.0, &fso, EvalOptions::default()).unwrap().value;
    let q = b.quadrature(10.0, |_| Ok(1.0), 1e-12).unwrap();
    assert!((v / q - 1.0).abs() < 1e-9);
}

#[test]
fn first_moment_term_matches_factorized_oracle() {
    let p = common::params(2, 100.0, 1e4, 5);
    let ctx = EvalContext::default();
    let t = e2e_moment_terms(1, &p, &ctx).unwrap();
    let sel = SelectedSnrTable::new(p.rf()).unwrap();
    let intf = p.interference().clone();
    let inv = mass(|x| inr_pdf(x, &intf) / (1.0 + x), 1e-6, 1e2, 1e-13);
    let oracle = sel.moment(1.0) * inv;
    assert!((t.i1 / oracle - 1.0).abs() < 1e-6);
    assert!((t.i2 - p.fso().moment(1.0).unwrap()).abs() < 1e-12 * t.i2);
}

#[test]
fn moments_match_quadrature() {
    let p = common::params(2, 100.0, 1e4, 5);
    let ctx = EvalContext::default();
    for nu in [1, 2] {
        let a = e2e_moment(nu, &p, &ctx).unwrap();
        assert!(!a.semi_analytic);
        let q = e2e_moment_quadrature(nu, &p).unwrap();
        assert!((a.value / q - 1.0).abs() < 1e-5, "ν={nu}: {} vs {q}", a.value);
    }
}

#[test]
fn amount_of_fading_basics() {
    let p = common::params(2, 100.0, 1e4, 5);
    let ctx = EvalContext::default();
    assert_eq!(amount_of_fading(1, &p, &ctx).unwrap(), 0.0);
    assert!(amount_of_fading(2, &p, &ctx).unwrap() > 0.0);
}

#[test]
fn mgf_matches_quadrature_and_limit() {
    let p = common::params(2, 100.0, 1e4, 5);
    let ctx = EvalContext::default();
    assert_eq!(e2e_mgf(0.0, &p, &ctx).unwrap().value, 1.0);
    for t in [-1.0, -0.05] {
        let a = e2e_mgf(t, &p, &ctx).unwrap();
        let q = e2e_mgf_quadrature(t, &p).unwrap();
        assert!((a.value - q).abs() < 1e-6, "t={t}: {} vs {q}", a.value);
    }
    let near = e2e_mgf(-1e-7, &p, &ctx).unwrap().value;
    assert!((near - 1.0).abs() < 1e-4);
    assert!(e2e_mgf(0.5, &p, &ctx).is_err());
}

#[test]
fn stronger_correlation_lowers_effective_cdf() {
    let mk = |rho| {
        EndToEndParams::new(
            RfLinkParams::new(2, 20.0, 3, 3, rho).unwrap(),
            InterferenceParams::uniform(5, 1, 10.0).unwrap(),
            common::fso(rfso::channel::Detection::Heterodyne, 1e3),
        )
        .unwrap()
    };
    let (lo, hi) = (mk(0.3), mk(0.9));
    for g in [1.0, 5.0, 20.0] {
        assert!(effective_snr_cdf(g, &hi).unwrap() <= effective_snr_cdf(g, &lo).unwrap());
    }
}

#[test]
fn weaker_interference_lowers_effective_cdf() {
    let mk = |beta| {
        EndToEndParams::new(
            RfLinkParams::new(2, 20.0, 3, 3, 0.9).unwrap(),
            InterferenceParams::uniform(5, 1, beta).unwrap(),
            common::fso(rfso::channel::Detection::Heterodyne, 1e3),
        )
        .unwrap()
    };
    for g in [1.0, 5.0, 20.0] {
        assert!(effective_snr_cdf(g, &mk(20.0)).unwrap() < effective_snr_cdf(g, &mk(5.0)).unwrap());
    }
}
