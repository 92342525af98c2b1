use serde::{Deserialize, Serialize};

use super::{stein_solve, PanjerPSD, SteinSolution};
use crate::error::{Error, Result};

/// Which normalization of the binomial Stein operator is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorConvention {
    /// `(p/q)(n-k) g(k+1) - k g(k)`, the Panjer form.
    Panjer,
    /// `p(n-k) g(k+1) - q k g(k)`, the Panjer form times `q`.
    Conventional,
}

/// Binomial Stein operator under an explicit convention. The two choices
/// differ by the factor `q`, so their solutions differ by `1/q` and so do
/// their `Δg` bounds: `1/(np)` versus `1/(npq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialOperator {
    pub n: u64,
    pub p: f64,
    pub convention: OperatorConvention,
}

impl BinomialOperator {
    pub fn new(n: u64, p: f64, convention: OperatorConvention) -> Result<Self> {
        PanjerPSD::binomial(n, p)?;
        Ok(Self { n, p, convention })
    }

    pub fn family(&self) -> PanjerPSD {
        PanjerPSD::binomial(self.n, self.p).expect("validated in new")
    }

    fn scale(&self) -> f64 {
        match self.convention {
            OperatorConvention::Panjer => 1.0,
            OperatorConvention::Conventional => 1.0 - self.p,
        }
    }

    pub fn apply(&self, g: &dyn Fn(u64) -> f64, k: u64) -> Result<f64> {
        if g(0) != 0.0 {
            return Err(Error::InvalidArgument("Stein functions must vanish at zero".into()));
        }
        let (p, q) = (self.p, 1.0 - self.p);
        let up = if k >= self.n { 0.0 } else { (self.n - k) as f64 * g(k + 1) };
        Ok(match self.convention {
            OperatorConvention::Panjer => p / q * up - k as f64 * g(k),
            OperatorConvention::Conventional => p * up - q * k as f64 * g(k),
        })
    }

    pub fn delta_g_bound(&self) -> f64 {
        1f64.min(1.0 / (self.n as f64 * self.p)) / self.scale()
    }

    pub fn solve(&self, f: &dyn Fn(u64) -> f64) -> Result<SteinSolution> {
        let sol = stein_solve(&self.family(), f, self.n)?;
        Ok(match self.convention {
            OperatorConvention::Panjer => sol,
            OperatorConvention::Conventional => sol.scaled(self.scale()),
        })
    }
}
