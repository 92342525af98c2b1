//! Exact reference values, computed independently with rational arithmetic
//! and frozen here.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use steinpsd::bound::{
    bound_crude, bound_d2, d_statistic, exact_tv, BoundContext, NbFit, PoissonFit, Preconditions, VariantRegistry,
};
use steinpsd::dependent::{compute_moments, BernoulliProduct, DependentSequence, SummandModel};
use steinpsd::oracle::{conditional_terms, dp_law, exact_conditional_d, model_law, Conditioning, RunAutomaton};
use steinpsd::psd::{delta_g_uniform_bound, g_sup_norm, PanjerPSD, PowerSeries};
use steinpsd::runs::{k1k2_bound, nb_moment_match_2runs, two_runs_bound, two_runs_cbar, K1K2Model, TwoRunsModel};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn tv_against(model: &dyn SummandModel, target: &PanjerPSD) -> f64 {
    let law = model_law(model, 1 << 22).unwrap();
    exact_tv(&law, &target.table(law.masses.len() + 1).unwrap()).hi
}

#[test]
fn r6_law_is_exact() {
    let a = RunAutomaton::new(vec![true, true]).unwrap();
    let law = dp_law(&a, &vec![r(3, 10); 7]);
    let frozen = [
        r(623917, 1000000),
        r(1268757, 5000000),
        r(895671, 10000000),
        r(3969, 156250),
        r(15309, 2500000),
        r(5103, 5000000),
        r(2187, 10000000),
    ];
    assert_eq!(law, frozen);
}

#[test]
fn r6_distance_to_matched_nb() {
    let target = nb_moment_match_2runs(6, 0.3).unwrap();
    let law = model_law(&TwoRunsModel::iid(6, 0.3).unwrap(), 1 << 10).unwrap();
    let tv = exact_tv(&law, &target.table(law.masses.len() + 1).unwrap());
    assert!((tv.value - 0.0123066760548072).abs() < 1e-14, "{tv:?}");
    assert!(tv.hi - tv.lo < 1e-15);
}

#[test]
fn poisson_smoothness() {
    // Unimodal law: D = 2 max_k p_k = 4 e^{-2}.
    let t = PanjerPSD::poisson(2.0).unwrap().table(41).unwrap();
    assert!((d_statistic(&t) - 4.0 * (-2f64).exp()).abs() < 1e-15);
    assert!((d_statistic(&t) - 2.0 * exact_tv(&t, &t.shifted(1)).value).abs() < 1e-15);
}

#[test]
fn conditional_d_within_cbar() {
    let seq = DependentSequence::exact(Arc::new(TwoRunsModel::iid(8, 0.4).unwrap()));
    let c = two_runs_cbar(8).unwrap();
    for cond in [Conditioning::N2, Conditioning::N1N2] {
        for law in exact_conditional_d(&seq, 4, cond).unwrap() {
            assert!(law.d <= c, "{law:?}");
        }
    }
    let t = conditional_terms(&seq).unwrap()[3];
    assert!((t.sup_d_n1n2 - 1.68).abs() < 1e-12);
    assert!((t.sup_d_n2 - 1.337477351916376).abs() < 1e-12);
}

#[test]
fn independent_summands_theorem_dominates() {
    let seq = DependentSequence::exact(Arc::new(BernoulliProduct::new(vec![0.2; 10]).unwrap()));
    let ctx = BoundContext::fitted(seq, &PoissonFit).unwrap();
    let tv = tv_against(ctx.seq.model.as_ref(), &ctx.target);
    for v in ["theorem31", "d1", "d2", "min", "crude"] {
        let r = VariantRegistry::builtin().get(v).unwrap().evaluate(&ctx).unwrap();
        assert!(tv <= r.upper(), "{v}: {tv} > {}", r.total);
    }
}

#[test]
fn d2_hand_expansion() {
    // Independent Bernoulli(0.1), n = 10, Poisson(1): b = 0, N_{i,1} = {i-1, i, i+1}.
    let seq = DependentSequence::exact(Arc::new(BernoulliProduct::new(vec![0.1; 10]).unwrap()));
    let m = compute_moments(&seq).unwrap();
    let spec = PanjerPSD::poisson(1.0).unwrap();
    let r = bound_d2(&m, &spec, 1.0, &Preconditions::default()).unwrap();
    // Σ E X_i E X_{N_{i,1}} = 0.1 (8 * 0.3 + 2 * 0.2); Σ E X_i X_{N_{i,1}} = 10 (0.1 + ...) with
    // X_i X_j independent: 0.1 + 0.01 * (#neighbours).
    let first = 0.1 * (8.0 * 0.3 + 2.0 * 0.2);
    let second = 8.0 * (0.1 + 0.02) + 2.0 * (0.1 + 0.01);
    assert!((r.total - (first + second + 1.0)).abs() < 1e-12);
}

#[test]
fn crude_bound_dominates() {
    let model = BernoulliProduct::new(vec![0.2; 4]).unwrap();
    let seq = DependentSequence::exact(Arc::new(model.clone()));
    let m = compute_moments(&seq).unwrap();
    let spec = PanjerPSD::poisson(0.8).unwrap();
    let g = g_sup_norm(&spec, 200).unwrap();
    let r = bound_crude(&m, &spec, g, delta_g_uniform_bound(&spec).unwrap()).unwrap();
    assert!(r.total.is_finite() && tv_against(&model, &spec) <= r.total);
}

#[test]
fn two_runs_theorem_dominates() {
    let model = TwoRunsModel::iid(10, 0.3).unwrap();
    let spec = nb_moment_match_2runs(10, 0.3).unwrap();
    let r = two_runs_bound(&model, &spec, delta_g_uniform_bound(&spec).unwrap()).unwrap();
    assert!(tv_against(&model, &spec) <= r.total);
    // Same value as d1 fed with the closed-form moments and uncapped c̄ when c̄ < 2.
    let seq = DependentSequence::exact(Arc::new(TwoRunsModel::iid(20, 0.3).unwrap()));
    let ctx = BoundContext::fitted(seq, &NbFit).unwrap();
    let d1 = VariantRegistry::builtin().get("d1").unwrap().evaluate(&ctx).unwrap();
    let m = TwoRunsModel::iid(20, 0.3).unwrap();
    let t = two_runs_bound(&m, &ctx.target, ctx.delta_g().unwrap()).unwrap();
    assert!((d1.total - t.total).abs() < 1e-12 * t.total);
}

#[test]
fn k1k2_theorem_dominates() {
    let model = K1K2Model::iid(1, 1, 9, 0.3).unwrap();
    let mean = compute_moments(&DependentSequence::exact(Arc::new(model.clone()))).unwrap().mean;
    let spec = PanjerPSD::poisson(mean).unwrap();
    let r = k1k2_bound(&model, &spec, delta_g_uniform_bound(&spec).unwrap()).unwrap();
    assert!(tv_against(&model, &spec) <= r.total);

    // NB with the mean matched only; τ absorbs the variance gap.
    let model = K1K2Model::iid(1, 2, 9, 0.3).unwrap();
    let mean = compute_moments(&DependentSequence::exact(Arc::new(model.clone()))).unwrap().mean;
    let p_bar = 0.9;
    let spec = PanjerPSD::negative_binomial(mean * p_bar / (1.0 - p_bar), p_bar).unwrap();
    let r = k1k2_bound(&model, &spec, delta_g_uniform_bound(&spec).unwrap()).unwrap();
    assert!(r.term_tau > 0.0);
    assert!(tv_against(&model, &spec) <= r.total);
}

#[test]
fn small_n_is_refused_unless_overridden() {
    let seq = DependentSequence::exact(Arc::new(TwoRunsModel::iid(5, 0.3).unwrap()));
    let ctx = BoundContext::fitted(seq, &NbFit).unwrap();
    let theorem = VariantRegistry::builtin().get("theorem").unwrap();
    assert!(theorem.evaluate(&ctx).unwrap_err().to_string().contains("n ≥ 6"));
    let ctx = ctx.with_preconditions(Preconditions { allow_small_n: true, ..Default::default() });
    assert!(theorem.evaluate(&ctx).is_ok());
}
