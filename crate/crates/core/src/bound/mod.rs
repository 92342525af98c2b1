//! Total-variation error bounds for sums of 1-dependent summands against a
//! Panjer-class target.

mod distance;
mod fit;
mod formulas;
mod registry;
mod report;
mod smoothing;

pub use distance::{d_statistic, exact_tv, TvInterval};
pub use fit::{fit_registry, FitRegistry, NbFit, PoissonFit, TargetFit};
pub use formulas::{
    bound_crude, bound_d1, bound_d2, bound_min, tau_term, target_mean, theorem31_bound, Preconditions, MIN_N,
};
pub use registry::{BoundContext, BoundVariant, VariantRegistry};
pub use report::{BoundReport, RunsBoundReport, RunsMomentTerms};
pub use smoothing::{
    exact_smoothing, m_star, roellin_bound, smoothing_estimate, smoothing_roellin, SmoothingEntry,
    SmoothingEstimate, SmoothingMethod, D_MAX,
};

pub(crate) use formulas::check_mean;
