//! Power-series distributions, their Stein operator and the Stein-equation
//! solution.
//!
//! A power-series law has mass `p_k = a_k θ^k / γ(θ)`. Everything the Stein
//! machinery needs is captured by [`PowerSeries`]: the operator coefficient
//! `(k+1) p_{k+1} / p_k` and a normalized, tail-certified mass table.

mod binomial;
mod panjer;
mod series;
mod stein;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::PmfTable;

pub use binomial::{BinomialOperator, OperatorConvention};
pub use panjer::{pmf_panjer, pmf_panjer_exact, psd_mean_var, PanjerPSD};
pub use series::{dgm_to_psd, PsdSpec};
pub use stein::{
    delta_g_exact_sup, delta_g_uniform_bound, g_sup_norm, stein_apply, stein_expectation, stein_solve,
    SteinExpectation, SteinSolution,
};

/// Default relative tail mass below which tables stop growing.
pub const TABLE_TAIL_EPS: f64 = 1e-17;

/// Longest table any family may request before it is declared divergent.
pub const MAX_TABLE_LEN: usize = 5_000_000;

/// A member of the power-series family seen through its Stein operator.
pub trait PowerSeries: Send + Sync + fmt::Debug {
    /// `(k+1) p_{k+1} / p_k`, the coefficient multiplying `g(k+1)` in the
    /// Stein operator. Zero at and beyond the last support point.
    fn step_ratio(&self, k: u64) -> f64;

    /// Largest support point for finite families.
    fn support_max(&self) -> Option<u64>;

    /// Normalized mass table with at least `min_len` entries (fewer only when
    /// the support ends first), grown until the certified tail relative to
    /// the accumulated mass drops below `tail_eps`.
    fn table_with(&self, min_len: usize, tail_eps: f64) -> Result<PmfTable>;

    /// Certified `sup_{j >= k} p_{j+1}/p_j`; `None` when not certifiable.
    fn tail_ratio_bound(&self, k: u64) -> Option<f64>;

    fn table(&self, min_len: usize) -> Result<PmfTable> {
        self.table_with(min_len, TABLE_TAIL_EPS)
    }

    fn mean(&self) -> Result<f64> {
        Ok(self.table(0)?.mean())
    }
}

/// JSON form of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Panjer(PanjerPSD),
    Series { theta: f64, coeffs: Vec<f64> },
}

impl FamilySpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: FamilySpec = serde_json::from_str(s)?;
        spec.build()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn build(&self) -> Result<Box<dyn PowerSeries>> {
        match self {
            FamilySpec::Panjer(p) => {
                p.validate()?;
                Ok(Box::new(p.clone()))
            }
            FamilySpec::Series { theta, coeffs } => Ok(Box::new(PsdSpec::finite(*theta, coeffs.clone())?)),
        }
    }

    /// The Panjer parametrization, required by the bound formulas.
    pub fn as_panjer(&self) -> Result<&PanjerPSD> {
        match self {
            FamilySpec::Panjer(p) => Ok(p),
            FamilySpec::Series { .. } => {
                Err(Error::InvalidArgument("bounds need a family in Panjer (a, b) form".into()))
            }
        }
    }
}
