use super::{BoundReport, SmoothingEstimate};
use crate::dependent::MomentSet;
use crate::error::{Error, Result};
use crate::oracle::ConditionalTerms;
use crate::psd::PanjerPSD;

/// Smallest `n` the general theorem is stated for.
pub const MIN_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preconditions {
    /// Evaluate for `n < 6` anyway.
    pub allow_small_n: bool,
    /// Absolute tolerance on `E Z = E W`, scaled by `max(1, E W)`.
    pub mean_tol: f64,
}

impl Default for Preconditions {
    fn default() -> Self {
        Self { allow_small_n: false, mean_tol: 1e-9 }
    }
}

pub fn target_mean(spec: &PanjerPSD) -> Result<f64> {
    Ok(spec.mean_var()?.0)
}

pub(crate) fn check_mean(moments: &MomentSet, spec: &PanjerPSD, tol: f64) -> Result<()> {
    let target = target_mean(spec)?;
    if (target - moments.mean).abs() > tol * moments.mean.abs().max(1.0) {
        return Err(Error::MomentMismatch { target, sum: moments.mean });
    }
    Ok(())
}

fn check_n(n: usize, pre: &Preconditions) -> Result<()> {
    if n < MIN_N && !pre.allow_small_n {
        return Err(Error::Precondition(format!(
            "the bound needs n ≥ {MIN_N}, got n = {n}; use the crude variant or allow small n explicitly"
        )));
    }
    Ok(())
}

/// `|1 - b| |Var W - a/(1-b)^2|`.
pub fn tau_term(moments: &MomentSet, spec: &PanjerPSD) -> Result<f64> {
    let var_z = spec.mean_var()?.1;
    Ok((1.0 - spec.b).abs() * (moments.variance - var_z).abs())
}

/// General bound with the exact conditional `D` values.
pub fn theorem31_bound(
    moments: &MomentSet,
    conditionals: &[ConditionalTerms],
    spec: &PanjerPSD,
    delta_g: f64,
    pre: &Preconditions,
) -> Result<BoundReport> {
    let n = moments.len();
    if conditionals.len() != n {
        return Err(Error::InvalidArgument("one set of conditional terms per index is required".into()));
    }
    check_mean(moments, spec, pre.mean_tol)?;
    check_n(n, pre)?;
    let one_minus_b = (1.0 - spec.b).abs();
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut t3 = 0.0;
    for (m, c) in moments.per_index.iter().zip(conditionals) {
        t1 += m.e_x * c.bracket_n1;
        t2 += c.bracket_x_n1;
        t3 += c.x_n2_minus_1;
    }
    let quad = 0.5 * one_minus_b * (t1 + t2);
    let tau = tau_term(moments, spec)?;
    let mut r = BoundReport::assemble("theorem31", n, spec.a, spec.b, delta_g, [quad, t3, tau]);
    r.smoothing = conditionals.iter().map(|c| c.sup_d_n2.max(c.sup_d_n1n2)).collect();
    Ok(r)
}

/// General bound with `c_i(n)` in place of every conditional `D`.
pub fn bound_d1(
    moments: &MomentSet,
    smoothing: &SmoothingEstimate,
    spec: &PanjerPSD,
    delta_g: f64,
    pre: &Preconditions,
) -> Result<BoundReport> {
    let n = moments.len();
    if smoothing.len() != n {
        return Err(Error::InvalidArgument("one smoothing constant per index is required".into()));
    }
    check_mean(moments, spec, pre.mean_tol)?;
    check_n(n, pre)?;
    let one_minus_b = (1.0 - spec.b).abs();
    let mut quad = 0.0;
    let mut lin = 0.0;
    for (i, m) in moments.per_index.iter().enumerate() {
        let c = smoothing.c(i + 1);
        quad += c * 0.5 * one_minus_b * (m.e_x * m.bracket_n1 + m.bracket_x_n1);
        lin += c * m.x_n2_minus_1;
    }
    let tau = tau_term(moments, spec)?;
    let mut r = BoundReport::assemble("d1", n, spec.a, spec.b, delta_g, [quad, lin, tau]);
    r.smoothing = smoothing.values();
    Ok(r)
}

/// First-moment-only bound.
pub fn bound_d2(moments: &MomentSet, spec: &PanjerPSD, delta_g: f64, pre: &Preconditions) -> Result<BoundReport> {
    check_mean(moments, spec, pre.mean_tol)?;
    let one_minus_b = (1.0 - spec.b).abs();
    let quad = one_minus_b * moments.per_index.iter().map(|m| m.e_x * m.e_n1 + m.e_x_n1).sum::<f64>();
    let lin = moments.sum_e_x();
    Ok(BoundReport::assemble("d2", moments.len(), spec.a, spec.b, delta_g, [quad, lin, 0.0]))
}

/// `(2|1-b| ‖g‖ + ‖Δg‖) Σ E X_i`, itemized with a unit factor.
pub fn bound_crude(moments: &MomentSet, spec: &PanjerPSD, g_norm: f64, delta_g: f64) -> Result<BoundReport> {
    if moments.is_empty() {
        return Err(Error::InvalidArgument("need at least one summand".into()));
    }
    let s = moments.sum_e_x();
    let quad = 2.0 * (1.0 - spec.b).abs() * g_norm * s;
    Ok(BoundReport::assemble("crude", moments.len(), spec.a, spec.b, 1.0, [quad, delta_g * s, 0.0]))
}

/// `min{d1, d2}`, always labelled `min` and carrying both operands.
pub fn bound_min(d1: BoundReport, d2: BoundReport) -> BoundReport {
    let best = if d2.total < d1.total { &d2 } else { &d1 };
    let mut r = BoundReport { variant: "min".into(), operands: Vec::new(), ..best.clone() };
    r.slack = d1.slack.max(d2.slack);
    r.operands = vec![d1, d2];
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependent::{IndexMoments, MomentSet};
    use crate::bound::SmoothingMethod;

    fn zeros(n: usize) -> MomentSet {
        MomentSet::from_index_moments(vec![IndexMoments::default(); n])
    }

    #[test]
    fn degenerate_sequence_gives_zero() {
        let m = zeros(8);
        let spec = PanjerPSD::new(0.0, 0.0, None).unwrap();
        let pre = Preconditions::default();
        let s = SmoothingEstimate::uniform(8, 1.0, SmoothingMethod::ModelClosedForm);
        assert_eq!(bound_d1(&m, &s, &spec, 1.0, &pre).unwrap().total, 0.0);
        assert_eq!(bound_d2(&m, &spec, 1.0, &pre).unwrap().total, 0.0);
        assert_eq!(bound_crude(&m, &spec, 1.0, 1.0).unwrap().total, 0.0);
        let c = vec![ConditionalTerms::default(); 8];
        assert_eq!(theorem31_bound(&m, &c, &spec, 1.0, &pre).unwrap().total, 0.0);
    }

    #[test]
    fn small_n_and_mismatch_rejected() {
        let m = zeros(4);
        let spec = PanjerPSD::new(0.0, 0.0, None).unwrap();
        let s = SmoothingEstimate::uniform(4, 1.0, SmoothingMethod::ModelClosedForm);
        assert!(matches!(bound_d1(&m, &s, &spec, 1.0, &Preconditions::default()), Err(Error::Precondition(_))));
        let lax = Preconditions { allow_small_n: true, ..Default::default() };
        assert!(bound_d1(&m, &s, &spec, 1.0, &lax).is_ok());
        let poi = PanjerPSD::poisson(1.0).unwrap();
        assert!(matches!(bound_d2(&m, &poi, 1.0, &lax), Err(Error::MomentMismatch { .. })));
    }

    #[test]
    fn min_keeps_both_operands() {
        let a = BoundReport::assemble("d1", 8, 1.0, 0.0, 0.5, [1.0, 1.0, 0.0]);
        let b = BoundReport::assemble("d2", 8, 1.0, 0.0, 0.5, [1.0, 1.0, 0.0]);
        let m = bound_min(a, b);
        assert_eq!(m.variant, "min");
        assert_eq!(m.operands.len(), 2);
        assert!(m.is_consistent(1e-12));
    }
}
