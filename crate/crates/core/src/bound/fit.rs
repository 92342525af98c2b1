use std::sync::Arc;

use crate::dependent::MomentSet;
use crate::error::{Error, Result};
use crate::psd::PanjerPSD;

/// Chooses target parameters from the moments of the sum.
pub trait TargetFit: Send + Sync {
    fn name(&self) -> &'static str;
    fn fit(&self, moments: &MomentSet) -> Result<PanjerPSD>;
}

/// Point mass at zero, the limit of every family as the mean vanishes.
fn degenerate() -> Result<PanjerPSD> {
    PanjerPSD::new(0.0, 0.0, None)
}

/// Poisson with the same mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonFit;

impl TargetFit for PoissonFit {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn fit(&self, m: &MomentSet) -> Result<PanjerPSD> {
        if m.mean == 0.0 {
            return degenerate();
        }
        PanjerPSD::poisson(m.mean)
    }
}

/// Negative binomial with the same mean and variance: `p̄ = E/Var`,
/// `α = E p̄ / (1 - p̄)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NbFit;

impl NbFit {
    pub fn from_mean_var(mean: f64, var: f64) -> Result<PanjerPSD> {
        if mean == 0.0 && var == 0.0 {
            return degenerate();
        }
        if !(var > mean) || !(mean > 0.0) {
            return Err(Error::NbUnfittable { mean, var });
        }
        let p_bar = mean / var;
        PanjerPSD::negative_binomial(mean * p_bar / (1.0 - p_bar), p_bar)
    }
}

impl TargetFit for NbFit {
    fn name(&self) -> &'static str {
        "nb"
    }

    fn fit(&self, m: &MomentSet) -> Result<PanjerPSD> {
        Self::from_mean_var(m.mean, m.variance)
    }
}

#[derive(Clone)]
pub struct FitRegistry {
    fits: Vec<Arc<dyn TargetFit>>,
}

impl FitRegistry {
    pub fn get(&self, name: &str) -> Result<Arc<dyn TargetFit>> {
        self.fits.iter().find(|f| f.name() == name).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("unknown fit '{name}', expected one of: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.fits.iter().map(|f| f.name()).collect()
    }

    pub fn register(&mut self, fit: Arc<dyn TargetFit>) {
        self.fits.retain(|f| f.name() != fit.name());
        self.fits.push(fit);
    }
}

pub fn fit_registry() -> FitRegistry {
    FitRegistry { fits: vec![Arc::new(NbFit), Arc::new(PoissonFit)] }
}
