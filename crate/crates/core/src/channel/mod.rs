//! Per-hop channel statistics.

pub mod fso;
pub mod interference;
pub mod rf;

pub use fso::{
    avg_snr_relation, derive_pointing_coefficients, fso_snr_cdf, fso_snr_pdf, path_loss, pointing_gain,
    turbulence_pdf, Detection, FsoLinkParams, PointingCoefficients, PointingGeometry,
};
pub use interference::{inr_cdf, inr_pdf, InterferenceParams};
pub use rf::{
    rf_selected_snr_cdf, rf_selected_snr_pdf, rf_snr_cdf_outdated, rf_snr_pdf_outdated, rho_from_jakes,
    xi_coefficients, GammaTerm, RfLinkParams, SelectedSnrTable,
};
