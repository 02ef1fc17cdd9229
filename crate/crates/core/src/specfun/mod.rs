//! Special functions used by the closed-form expressions.

pub mod bessel;
pub(crate) mod contour;
pub mod gamma;

pub use contour::{ContourPlan, ContourValue};
pub mod foxh;
pub mod meijer;
pub mod tricomi;

pub use foxh::{fox_h, fox_h_bivariate, fox_h_trivariate, fox_h_univariate, EvalOptions, FoxHSpec, FoxHVariable, HParam, JointFactor, Scale};
pub use meijer::{meijer_g, meijer_g_with_plan, MeijerGSpec};
pub use tricomi::tricomi_u;
