//! Cross-checks of closed forms and bounds against the exact oracles.

use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::bound::{exact_tv, fit_registry, BoundContext, Preconditions, VariantRegistry};
use crate::dependent::{enumerate_moments, DependentSequence, MomentSet, SummandModel};
use crate::error::{Error, Result};
use crate::oracle::{brute_force_law, conditional_terms, dp_law, exact_probs, model_law, RunAutomaton};
use crate::psd::PowerSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub model: String,
    pub n: usize,
    pub target: String,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub max_outcomes: u64,
    /// Fit used for the target; `None` tries `nb`, then `poisson`.
    pub fit: Option<String>,
    /// Multiplies every closed-form `E[X_i X_{N_{i,1}}(2X_{N_{i,2}} - X_{N_{i,1}} - 1)]`
    /// before comparison, to exercise the failure path.
    pub corrupt_bracket_x_n1: Option<f64>,
    pub tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { max_outcomes: 1 << 20, fit: None, corrupt_bracket_x_n1: None, tolerance: 1e-12 }
    }
}

fn check(name: impl Into<String>, ok: bool, detail: String) -> CheckResult {
    CheckResult { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, detail }
}

fn skip(name: impl Into<String>, detail: String) -> CheckResult {
    CheckResult { name: name.into(), status: Status::Skip, detail }
}

fn max_moment_gap(a: &MomentSet, b: &MomentSet) -> (f64, String) {
    let mut worst = (0.0f64, String::new());
    for (i, (x, y)) in a.per_index.iter().zip(&b.per_index).enumerate() {
        for ((name, u), (_, v)) in x.fields().iter().zip(y.fields()) {
            let gap = (u - v).abs();
            if gap > worst.0 || gap.is_nan() {
                worst = (gap, format!("{name} at i = {}", i + 1));
            }
        }
    }
    worst
}

fn fitted_context(seq: DependentSequence, opts: &VerifyOptions) -> Result<BoundContext> {
    let fits = fit_registry();
    let ctx = match &opts.fit {
        Some(name) => BoundContext::fitted(seq, fits.get(name)?.as_ref()),
        None => match BoundContext::fitted(seq.clone(), fits.get("nb")?.as_ref()) {
            Err(Error::NbUnfittable { .. }) => BoundContext::fitted(seq, fits.get("poisson")?.as_ref()),
            other => other,
        },
    }?;
    Ok(ctx.with_preconditions(Preconditions::default()))
}

/// Runs every applicable check on an enumerable model.
pub fn verify_model(model: Arc<dyn SummandModel>, opts: &VerifyOptions) -> Result<VerifyReport> {
    let seq = DependentSequence::exact(model.clone()).with_max_outcomes(opts.max_outcomes);
    let mut checks = Vec::new();

    // Oracle agreement.
    if let Some(pattern) = model.count_pattern() {
        let automaton = RunAutomaton::new(pattern)?;
        let probs = model.trial_probs();
        let dp = dp_law(&automaton, probs);
        let bf = brute_force_law(model.as_ref(), probs, opts.max_outcomes)?;
        let gap = dp.iter().zip(&bf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let ok = dp.len() == bf.len() && gap <= 1e-14;
        checks.push(check("dp-equals-enumeration", ok, format!("max mass gap {gap:.3e}")));
        if probs.len() <= 14 {
            let exact = exact_probs(probs)?;
            let dp = dp_law(&automaton, &exact);
            let bf = brute_force_law(model.as_ref(), &exact, opts.max_outcomes)?;
            let ok = dp == bf && !dp.iter().all(Zero::is_zero);
            checks.push(check("dp-equals-enumeration-rational", ok, format!("{} masses", dp.len())));
        }
    }

    // Closed-form moments.
    let oracle = enumerate_moments(&seq)?;
    match model.closed_form_moments() {
        Some(mut closed) => {
            if let Some(f) = opts.corrupt_bracket_x_n1 {
                closed.per_index.iter_mut().for_each(|m| m.bracket_x_n1 *= f);
            }
            let (gap, at) = max_moment_gap(&closed, &oracle);
            checks.push(check("closed-form-moments", gap <= opts.tolerance, format!("max gap {gap:.3e} ({at})")));
            let gap = (closed.variance - oracle.variance).abs();
            checks.push(check("closed-form-variance", gap <= opts.tolerance, format!("gap {gap:.3e}")));
        }
        None => checks.push(skip("closed-form-moments", format!("model '{}' has no closed form", model.kind()))),
    }

    // Smoothing constants against the exact conditional suprema.
    match model.closed_form_smoothing() {
        Some(s) => {
            let terms = conditional_terms(&seq)?;
            let mut worst = f64::NEG_INFINITY;
            for (i, t) in terms.iter().enumerate() {
                worst = worst.max(t.sup_d_n2.max(t.sup_d_n1n2) - s.c(i + 1));
            }
            checks.push(check(
                "smoothing-dominates-conditional-d",
                worst <= 1e-12,
                format!("max(sup D - c_i) = {worst:.6}"),
            ));
        }
        None => checks.push(skip("smoothing-dominates-conditional-d", "no closed-form smoothing".into())),
    }

    // Bounds against the exact distance.
    let ctx = fitted_context(seq, opts)?;
    let target_name = format!("{} (a = {}, b = {})", ctx.fit.clone().unwrap_or_default(), ctx.target.a, ctx.target.b);
    let law = model_law(model.as_ref(), opts.max_outcomes)?;
    let table = ctx.target.table(law.masses.len() + 1)?;
    let tv = exact_tv(&law, &table);
    for variant in VariantRegistry::builtin().iter() {
        let name = format!("bound-dominates-tv:{}", variant.name());
        match variant.evaluate(&ctx) {
            Ok(r) => {
                let ok = r.is_consistent(1e-12) && tv.hi <= r.upper();
                checks.push(check(name, ok, format!("tv ≤ {:.6e}, bound {:.6e}", tv.hi, r.upper())));
            }
            Err(e @ (Error::Precondition(_) | Error::Unavailable(_))) => checks.push(skip(name, e.to_string())),
            Err(e) => checks.push(check(name, false, e.to_string())),
        }
    }

    Ok(VerifyReport { model: model.kind().to_string(), n: model.len(), target: target_name, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runs::{K1K2Model, TwoRunsModel};

    #[test]
    fn two_runs_suite_passes() {
        let r = verify_model(Arc::new(TwoRunsModel::iid(8, 0.3).unwrap()), &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
    }

    #[test]
    fn corruption_is_caught() {
        let opts = VerifyOptions { corrupt_bracket_x_n1: Some(1.01), ..Default::default() };
        let r = verify_model(Arc::new(TwoRunsModel::iid(8, 0.3).unwrap()), &opts).unwrap();
        assert!(!r.passed());
        assert!(r.failures().all(|c| c.name == "closed-form-moments"));
    }

    #[test]
    fn smallest_k1k2_passes() {
        let r = verify_model(Arc::new(K1K2Model::iid(1, 1, 6, 0.4).unwrap()), &VerifyOptions::default()).unwrap();
        assert!(r.passed(), "{:#?}", r.checks);
    }
}
