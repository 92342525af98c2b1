//! JSON descriptions of the supported sums.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dependent::{BernoulliProduct, SummandModel};
use crate::error::{Error, Result};
use crate::runs::{K1K2Model, TwoRunsModel};

/// One probability for every trial, or the full vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probs {
    Common(f64),
    PerTrial(Vec<f64>),
}

impl Probs {
    fn expand(&self, trials: Option<usize>) -> Result<Vec<f64>> {
        match (self, trials) {
            (Probs::PerTrial(v), None) => Ok(v.clone()),
            (Probs::PerTrial(v), Some(t)) if v.len() == t => Ok(v.clone()),
            (Probs::PerTrial(v), Some(t)) => {
                Err(Error::InvalidArgument(format!("expected {t} trial probabilities, got {}", v.len())))
            }
            (Probs::Common(p), Some(t)) => Ok(vec![*p; t]),
            (Probs::Common(_), None) => Err(Error::InvalidArgument("a common probability needs n".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `n` summands over `n + 1` trials.
    TwoRuns {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        p: Probs,
    },
    /// `n` blocks over `(n + 1)(k1 + k2 - 1)` trials.
    K1k2Runs {
        k1: usize,
        k2: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        p: Probs,
    },
    /// Independent Bernoulli summands.
    CustomBernoulliProduct {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        p: Probs,
    },
}

impl ModelSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn build(&self) -> Result<Arc<dyn SummandModel>> {
        Ok(match self {
            ModelSpec::TwoRuns { n, p } => Arc::new(TwoRunsModel::new(p.expand(n.map(|n| n + 1))?)?),
            ModelSpec::K1k2Runs { k1, k2, n, p } => {
                let m = (k1 + k2).saturating_sub(1).max(1);
                Arc::new(K1K2Model::new(*k1, *k2, p.expand(n.map(|n| (n + 1) * m))?)?)
            }
            ModelSpec::CustomBernoulliProduct { n, p } => Arc::new(BernoulliProduct::new(p.expand(*n)?)?),
        })
    }
}
