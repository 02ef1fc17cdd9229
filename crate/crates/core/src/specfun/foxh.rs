//! Univariate and multivariate Fox H-functions.
//!
//! Each variable carries its own kernel
//! `Π_{j<m} Γ(b_j + B_j s) Π_{j<n} Γ(1 - a_j - A_j s) / (Π_{j≥m} Γ(1 - b_j - B_j s) Π_{j≥n} Γ(a_j + A_j s)) z^{-s}`,
//! and joint factors `Γ(c + Σ_k e_k s_k)^{±1}` couple the variables.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::contour::{self, ContourPlan, ContourValue, Factor, Kernel};
use crate::error::{Error, Result};

/// Positive rational scale `A_j` or `B_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Scale(Ratio<i64>);

impl Scale {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Usage(format!("Fox-H scale must be positive, got {value}")));
        }
        let r = Ratio::<i64>::approximate_float(value)
            .filter(|r| (r.to_f64().unwrap_or(f64::NAN) - value).abs() <= 1e-12 * value)
            .ok_or_else(|| Error::Usage(format!("scale {value} has no rational representation")))?;
        Ok(Scale(r))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0.to_f64().expect("finite ratio")
    }
}

impl TryFrom<f64> for Scale {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Scale::new(v)
    }
}

impl From<Scale> for f64 {
    fn from(s: Scale) -> f64 {
        s.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HParam {
    pub offset: f64,
    pub scale: Scale,
}

impl HParam {
    pub fn new(offset: f64, scale: f64) -> Result<Self> {
        Ok(Self {
            offset,
            scale: Scale::new(scale)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoxHVariable {
    pub a: Vec<HParam>,
    pub n: usize,
    pub b: Vec<HParam>,
    pub m: usize,
    pub argument: f64,
}

impl FoxHVariable {
    fn validate(&self) -> Result<()> {
        if self.n > self.a.len() || self.m > self.b.len() {
            return Err(Error::Usage("Fox-H orders exceed parameter counts".into()));
        }
        if self.a.iter().chain(&self.b).any(|p| !p.offset.is_finite()) {
            return Err(Error::Usage("non-finite Fox-H parameter".into()));
        }
        if !(self.argument > 0.0 && self.argument.is_finite()) {
            return Err(Error::Domain(format!(
                "Fox-H argument must be positive and finite, got {}",
                self.argument
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFactor {
    pub offset: f64,
    pub coeffs: Vec<f64>,
    pub numerator: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoxHSpec {
    pub variables: Vec<FoxHVariable>,
    pub joint: Vec<JointFactor>,
}

/// Accuracy and cost controls for multivariate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub tolerance: f64,
    /// Upper bound on tensor-grid nodes.
    pub budget: usize,
    pub max_refine: u32,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            budget: 6_000_000,
            max_refine: 3,
        }
    }
}

impl FoxHSpec {
    pub fn univariate(var: FoxHVariable) -> Self {
        Self {
            variables: vec![var],
            joint: vec![],
        }
    }

    pub fn dims(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::Usage("Fox-H needs at least one variable".into()));
        }
        for v in &self.variables {
            v.validate()?;
        }
        for j in &self.joint {
            if j.coeffs.len() != self.dims() {
                return Err(Error::Usage("joint factor has wrong coefficient count".into()));
            }
            if !j.offset.is_finite() || j.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::Usage("non-finite joint factor".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn kernel(&self) -> Kernel {
        let d = self.dims();
        let unit = |k: usize, e: f64| {
            let mut v = vec![0.0; d];
            v[k] = e;
            v
        };
        let mut factors = Vec::new();
        for (k, var) in self.variables.iter().enumerate() {
            for (j, p) in var.b.iter().enumerate() {
                let e = p.scale.value();
                factors.push(if j < var.m {
                    Factor::new(p.offset, unit(k, e), true)
                } else {
                    Factor::new(1.0 - p.offset, unit(k, -e), false)
                });
            }
            for (j, p) in var.a.iter().enumerate() {
                let e = p.scale.value();
                factors.push(if j < var.n {
                    Factor::new(1.0 - p.offset, unit(k, -e), true)
                } else {
                    Factor::new(p.offset, unit(k, e), false)
                });
            }
        }
        for j in &self.joint {
            factors.push(Factor::new(j.offset, j.coeffs.clone(), j.numerator));
        }
        Kernel {
            factors,
            ln_z: self.variables.iter().map(|v| v.argument.ln()).collect(),
        }
    }

    pub fn plan(&self, tolerance: f64) -> Result<ContourPlan> {
        self.validate()?;
        let (k, c, t, _) = contour::choose_abscissa(&self.kernel())?;
        contour::auto_plan(&k, c, t, tolerance)
    }
}

/// Any number of variables, automatic contour.
pub fn fox_h(spec: &FoxHSpec, opts: EvalOptions) -> Result<ContourValue> {
    spec.validate()?;
    let (k, c, t, perturbed) = contour::choose_abscissa(&spec.kernel())?;
    let plan = contour::auto_plan(&k, c, t, opts.tolerance)?;
    contour::evaluate(&k, &plan, t, perturbed, opts.budget, opts.max_refine)
}

/// Evaluate on a caller-supplied plan.
pub fn fox_h_with_plan(spec: &FoxHSpec, plan: &ContourPlan, opts: EvalOptions) -> Result<ContourValue> {
    spec.validate()?;
    contour::evaluate(&spec.kernel(), plan, 1.0, false, opts.budget, opts.max_refine)
}

pub fn fox_h_univariate(var: &FoxHVariable, tolerance: f64) -> Result<ContourValue> {
    fox_h(
        &FoxHSpec::univariate(var.clone()),
        EvalOptions {
            tolerance,
            ..EvalOptions::default()
        },
    )
}

pub fn fox_h_bivariate(spec: &FoxHSpec, opts: EvalOptions) -> Result<ContourValue> {
    if spec.dims() != 2 {
        return Err(Error::Usage(format!("expected 2 variables, got {}", spec.dims())));
    }
    fox_h(spec, opts)
}

pub fn fox_h_trivariate(spec: &FoxHSpec, opts: EvalOptions) -> Result<ContourValue> {
    if spec.dims() != 3 {
        return Err(Error::Usage(format!("expected 3 variables, got {}", spec.dims())));
    }
    fox_h(spec, opts)
}
