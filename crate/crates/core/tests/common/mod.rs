#![allow(dead_code)]

use rfso::channel::{Detection, FsoLinkParams, InterferenceParams, RfLinkParams};
use rfso::sinr::EndToEndParams;

pub const A0: f64 = 0.0186994375138279;
pub const XI: f64 = 6.89470725009469;

pub fn fso(detection: Detection, mu: f64) -> FsoLinkParams {
    FsoLinkParams {
        alpha1: 1.0,
        alpha2: 1.0,
        m1: 3,
        m2: 3,
        omega1: 1.0,
        omega2: 1.0,
        p: 2,
        q: 2,
        xi: XI,
        a0: A0,
        path_loss: 10f64.powf(-0.05),
        detection,
        mu_r: mu,
    }
}

pub fn params(m_sr: u32, snr: f64, mu: f64, interferers: usize) -> EndToEndParams {
    EndToEndParams::new(
        RfLinkParams::new(m_sr, snr, 3, 3, 0.9).unwrap(),
        InterferenceParams::uniform(interferers, 1, 10.0).unwrap(),
        fso(Detection::Heterodyne, mu),
    )
    .unwrap()
}
