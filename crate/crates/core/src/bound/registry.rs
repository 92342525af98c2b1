use std::sync::{Arc, OnceLock};

use super::fit::TargetFit;
use super::formulas::{bound_crude, bound_d1, bound_d2, bound_min, theorem31_bound, Preconditions};
use super::smoothing::{smoothing_estimate, SmoothingEstimate};
use super::BoundReport;
use crate::dependent::{compute_moments, DependentSequence, MomentSet};
use crate::error::{Error, Result};
use crate::oracle::{conditional_terms, ConditionalTerms};
use crate::psd::{delta_g_uniform_bound, g_sup_norm, PanjerPSD};

/// Everything a variant may need, computed at most once per context.
pub struct BoundContext {
    pub seq: DependentSequence,
    pub target: PanjerPSD,
    /// Name of the fit that produced `target`, if any.
    pub fit: Option<String>,
    pub pre: Preconditions,
    delta_g_override: Option<f64>,
    moments: OnceLock<Result<MomentSet>>,
    conditionals: OnceLock<Result<Vec<ConditionalTerms>>>,
    smoothing: OnceLock<Result<SmoothingEstimate>>,
}

impl BoundContext {
    pub fn new(seq: DependentSequence, target: PanjerPSD) -> Self {
        Self {
            seq,
            target,
            fit: None,
            pre: Preconditions::default(),
            delta_g_override: None,
            moments: OnceLock::new(),
            conditionals: OnceLock::new(),
            smoothing: OnceLock::new(),
        }
    }

    /// Target chosen by `fit` from the moments of `seq`.
    pub fn fitted(seq: DependentSequence, fit: &dyn TargetFit) -> Result<Self> {
        let moments = compute_moments(&seq)?;
        let target = fit.fit(&moments)?;
        let ctx = Self { fit: Some(fit.name().to_string()), ..Self::new(seq, target) };
        let _ = ctx.moments.set(Ok(moments));
        Ok(ctx)
    }

    pub fn with_preconditions(mut self, pre: Preconditions) -> Self {
        self.pre = pre;
        self
    }

    pub fn with_delta_g(mut self, delta_g: f64) -> Self {
        self.delta_g_override = Some(delta_g);
        self
    }

    pub fn moments(&self) -> Result<&MomentSet> {
        self.moments.get_or_init(|| compute_moments(&self.seq)).as_ref().map_err(Clone::clone)
    }

    pub fn conditionals(&self) -> Result<&[ConditionalTerms]> {
        self.conditionals
            .get_or_init(|| conditional_terms(&self.seq))
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(Clone::clone)
    }

    pub fn smoothing(&self) -> Result<&SmoothingEstimate> {
        self.smoothing.get_or_init(|| smoothing_estimate(&self.seq)).as_ref().map_err(Clone::clone)
    }

    /// `‖Δg‖`: the override, else the uniform bound for the target.
    pub fn delta_g(&self) -> Result<f64> {
        if let Some(d) = self.delta_g_override {
            return Ok(d);
        }
        if self.target.a == 0.0 {
            // Point mass at 0: g(k) = (f(0) - f(k))/k, so |Δg| <= 1/2 + 1.
            return Ok(1.5);
        }
        delta_g_uniform_bound(&self.target)
    }

    /// `sup |g_f|` over `f: Z+ -> [0, 1]`, taken far past the bulk of the
    /// target where the ratio `F̄(k)/(k p_k)` is decreasing.
    pub fn g_norm(&self) -> Result<f64> {
        if self.target.a == 0.0 {
            return Ok(1.0);
        }
        let (mean, var) = self.target.mean_var()?;
        let reach = (mean + 50.0 * var.sqrt() + 100.0).ceil() as u64;
        let k_max = self.target.max_support.map_or(reach, |s| s.min(reach));
        g_sup_norm(&self.target, k_max)
    }
}

/// One named way of turning a context into a bound.
pub trait BoundVariant: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport>;
}

struct Theorem;
struct D1;
struct D2;
struct Crude;
struct Min;
struct ClosedForm;

impl BoundVariant for Theorem {
    fn name(&self) -> &'static str {
        "theorem31"
    }
    fn describe(&self) -> &'static str {
        "general bound with exact conditional smoothness terms"
    }
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport> {
        theorem31_bound(ctx.moments()?, ctx.conditionals()?, &ctx.target, ctx.delta_g()?, &ctx.pre)
    }
}

impl BoundVariant for D1 {
    fn name(&self) -> &'static str {
        "d1"
    }
    fn describe(&self) -> &'static str {
        "general bound with smoothing constants c_i(n)"
    }
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport> {
        bound_d1(ctx.moments()?, ctx.smoothing()?, &ctx.target, ctx.delta_g()?, &ctx.pre)
    }
}

impl BoundVariant for D2 {
    fn name(&self) -> &'static str {
        "d2"
    }
    fn describe(&self) -> &'static str {
        "first-moment-only bound"
    }
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport> {
        bound_d2(ctx.moments()?, &ctx.target, ctx.delta_g()?, &ctx.pre)
    }
}

impl BoundVariant for Crude {
    fn name(&self) -> &'static str {
        "crude"
    }
    fn describe(&self) -> &'static str {
        "(2|1-b| ‖g‖ + ‖Δg‖) Σ E X_i"
    }
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport> {
        bound_crude(ctx.moments()?, &ctx.target, ctx.g_norm()?, ctx.delta_g()?)
    }
}

impl BoundVariant for Min {
    fn name(&self) -> &'static str {
        "min"
    }
    fn describe(&self) -> &'static str {
        "smaller of d1 and d2"
    }
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport> {
        Ok(bound_min(D1.evaluate(ctx)?, D2.evaluate(ctx)?))
    }
}

impl BoundVariant for ClosedForm {
    fn name(&self) -> &'static str {
        "closed-form"
    }
    fn describe(&self) -> &'static str {
        "model-specific closed form for runs statistics"
    }
    fn evaluate(&self, ctx: &BoundContext) -> Result<BoundReport> {
        crate::runs::closed_form_bound(ctx)
    }
}

#[derive(Clone)]
pub struct VariantRegistry {
    variants: Vec<Arc<dyn BoundVariant>>,
}

impl VariantRegistry {
    pub fn builtin() -> Self {
        Self {
            variants: vec![
                Arc::new(Theorem),
                Arc::new(D1),
                Arc::new(D2),
                Arc::new(Crude),
                Arc::new(Min),
                Arc::new(ClosedForm),
            ],
        }
    }

    pub fn register(&mut self, variant: Arc<dyn BoundVariant>) {
        self.variants.retain(|v| v.name() != variant.name());
        self.variants.push(variant);
    }

    /// Looks a variant up by name; `theorem` is accepted for `theorem31`.
    pub fn get(&self, name: &str) -> Result<Arc<dyn BoundVariant>> {
        let name = if name == "theorem" { "theorem31" } else { name };
        self.variants.iter().find(|v| v.name() == name).cloned().ok_or_else(|| {
            Error::InvalidArgument(format!("unknown variant '{name}', expected one of: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.variants.iter().map(|v| v.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn BoundVariant>> {
        self.variants.iter()
    }
}
