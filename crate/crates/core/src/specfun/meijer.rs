//! Meijer G-function on a vertical Mellin–Barnes contour.
//!
//! `G^{m,n}_{p,q}(x | a; b) = (1/2πi) ∫ Π_{j<m} Γ(b_j - s) Π_{j<n} Γ(1 - a_j + s)
//!   / (Π_{j≥m} Γ(1 - b_j + s) Π_{j≥n} Γ(a_j - s)) x^s ds`.

use serde::{Deserialize, Serialize};

use super::contour::{self, ContourPlan, ContourValue, Factor, Kernel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeijerGSpec {
    pub a: Vec<f64>,
    pub n: usize,
    pub b: Vec<f64>,
    pub m: usize,
    pub argument: f64,
}

impl MeijerGSpec {
    pub fn new(a: Vec<f64>, n: usize, b: Vec<f64>, m: usize, argument: f64) -> Result<Self> {
        let spec = Self { a, n, b, m, argument };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > self.a.len() || self.m > self.b.len() {
            return Err(Error::Usage(format!(
                "G^{{{},{}}}_{{{},{}}}: orders exceed parameter counts",
                self.m,
                self.n,
                self.a.len(),
                self.b.len()
            )));
        }
        if self.m + self.n == 0 {
            return Err(Error::Usage("m + n must be positive".into()));
        }
        if self.a.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Usage("non-finite G-function parameter".into()));
        }
        if !(self.argument > 0.0 && self.argument.is_finite()) {
            return Err(Error::Domain(format!(
                "G-function argument must be positive and finite, got {}",
                self.argument
            )));
        }
        let delta = 2 * (self.m + self.n) as i64 - (self.a.len() + self.b.len()) as i64;
        if delta <= 0 {
            return Err(Error::Domain(format!(
                "vertical contour diverges for G^{{{},{}}}_{{{},{}}}",
                self.m,
                self.n,
                self.a.len(),
                self.b.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn kernel(&self) -> Kernel {
        let mut factors = Vec::new();
        for (j, &b) in self.b.iter().enumerate() {
            factors.push(if j < self.m {
                Factor::new(b, vec![-1.0], true)
            } else {
                Factor::new(1.0 - b, vec![1.0], false)
            });
        }
        for (j, &a) in self.a.iter().enumerate() {
            factors.push(if j < self.n {
                Factor::new(1.0 - a, vec![1.0], true)
            } else {
                Factor::new(a, vec![-1.0], false)
            });
        }
        Kernel {
            factors,
            ln_z: vec![-self.argument.ln()],
        }
    }

    /// Automatic contour plan for a target relative tolerance.
    pub fn plan(&self, tolerance: f64) -> Result<ContourPlan> {
        self.validate()?;
        let (k, c, t, _) = contour::choose_abscissa(&self.kernel())?;
        contour::auto_plan(&k, c, t, tolerance)
    }
}

const BUDGET: usize = 4_000_000;

/// Evaluate with an automatically chosen contour.
pub fn meijer_g(spec: &MeijerGSpec, tolerance: f64) -> Result<ContourValue> {
    spec.validate()?;
    let (k, c, t, perturbed) = contour::choose_abscissa(&spec.kernel())?;
    let plan = contour::auto_plan(&k, c, t, tolerance)?;
    contour::evaluate(&k, &plan, t, perturbed, BUDGET, 4)
}

/// Evaluate on a caller-supplied plan. The abscissa must separate the poles.
pub fn meijer_g_with_plan(spec: &MeijerGSpec, plan: &ContourPlan) -> Result<ContourValue> {
    spec.validate()?;
    contour::evaluate(&spec.kernel(), plan, 1.0, false, BUDGET, 4)
}
