use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::neumaier_sum;

/// Finite probability mass function on `support_min, support_min+1, ...`
/// plus a certified upper bound on the mass it leaves out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    pub support_min: u64,
    pub masses: Vec<f64>,
    #[serde(rename = "tail")]
    pub tail_mass_bound: f64,
}

impl PmfTable {
    pub fn new(support_min: u64, masses: Vec<f64>, tail_mass_bound: f64) -> Result<Self> {
        if let Some(m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass {m} is not a finite non-negative number")));
        }
        if !(tail_mass_bound >= 0.0) {
            return Err(Error::InvalidArgument("tail bound must be non-negative".into()));
        }
        Ok(Self { support_min, masses, tail_mass_bound })
    }

    /// Exact law with no truncation, indexed from zero.
    pub fn exact(masses: Vec<f64>) -> Result<Self> {
        Self::new(0, masses, 0.0)
    }

    pub fn point_mass(k: u64) -> Self {
        Self { support_min: k, masses: vec![1.0], tail_mass_bound: 0.0 }
    }

    /// `P(X = k)`, zero outside the stored range.
    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.support_min {
            return 0.0;
        }
        self.masses.get((k - self.support_min) as usize).copied().unwrap_or(0.0)
    }

    /// One past the largest stored support point.
    pub fn end(&self) -> u64 {
        self.support_min + self.masses.len() as u64
    }

    pub fn total(&self) -> f64 {
        neumaier_sum(self.masses.iter().copied())
    }

    /// Checks `Σ masses + tail ∈ [1 − eps, 1 + eps]`.
    pub fn is_normalized(&self, eps: f64) -> bool {
        let t = self.total();
        t <= 1.0 + eps && t + self.tail_mass_bound >= 1.0 - eps
    }

    pub fn mean(&self) -> f64 {
        neumaier_sum(self.masses.iter().enumerate().map(|(i, p)| (self.support_min + i as u64) as f64 * p))
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        neumaier_sum(self.masses.iter().enumerate().map(|(i, p)| {
            let d = (self.support_min + i as u64) as f64 - mu;
            d * d * p
        }))
    }

    /// Same law moved right by `by`.
    pub fn shifted(&self, by: u64) -> Self {
        Self { support_min: self.support_min + by, ..self.clone() }
    }

    /// Masses re-indexed from zero up to (excluding) `end`.
    pub fn dense(&self, end: u64) -> Vec<f64> {
        (0..end).map(|k| self.pmf(k)).collect()
    }
}
