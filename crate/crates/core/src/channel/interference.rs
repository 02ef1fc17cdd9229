//! Aggregate co-channel interference at the relay.

use serde::{Deserialize, Serialize};

use super::rf::gamma_density;
use crate::error::{Error, Result};
use crate::specfun::gamma::lower_regularized_int;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceParams {
    /// Nakagami shape m_{R,k} of each interferer; empty means interference-free.
    pub shapes: Vec<u32>,
    pub beta_r: f64,
}

impl InterferenceParams {
    pub fn new(shapes: Vec<u32>, beta_r: f64) -> Result<Self> {
        let p = Self { shapes, beta_r };
        p.validate()?;
        Ok(p)
    }

    /// `count` identical interferers of shape `shape`.
    pub fn uniform(count: usize, shape: u32, beta_r: f64) -> Result<Self> {
        Self::new(vec![shape; count], beta_r)
    }

    pub fn none() -> Self {
        Self {
            shapes: vec![],
            beta_r: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shapes.contains(&0) {
            return Err(Error::config("interference.shapes", "each shape must be a positive integer"));
        }
        if !(self.beta_r > 0.0 && self.beta_r.is_finite()) {
            return Err(Error::config("interference.beta_r", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn num_interferers(&self) -> usize {
        self.shapes.len()
    }

    /// Aggregate shape m_R.
    pub fn m_r(&self) -> u32 {
        self.shapes.iter().sum()
    }

    pub fn is_free(&self) -> bool {
        self.shapes.is_empty()
    }
}

/// Gamma(m_R, 1/β_R) density of the total INR.
pub fn inr_pdf(g: f64, p: &InterferenceParams) -> f64 {
    if p.is_free() {
        return 0.0;
    }
    gamma_density(p.m_r(), p.beta_r, g)
}

pub fn inr_cdf(g: f64, p: &InterferenceParams) -> f64 {
    if p.is_free() {
        return if g >= 0.0 { 1.0 } else { 0.0 };
    }
    lower_regularized_int(p.m_r(), p.beta_r * g)
}
