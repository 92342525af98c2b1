use std::sync::Arc;

use proptest::prelude::*;

use steinpsd::bound::{d_statistic, exact_tv, m_star, tau_term, BoundContext, NbFit, PoissonFit, VariantRegistry};
use steinpsd::dependent::{enumerate_moments, DependentSequence, SummandModel};
use steinpsd::oracle::{naive_count, RunAutomaton};
use steinpsd::pmf::PmfTable;
use steinpsd::psd::{pmf_panjer, PanjerPSD};
use steinpsd::runs::{K1K2Model, TwoRunsModel};

fn pmf() -> impl Strategy<Value = PmfTable> {
    prop::collection::vec(0.0f64..1.0, 1..30).prop_filter_map("positive mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 0.0).then(|| PmfTable::exact(w.iter().map(|x| x / s).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_is_twice_shift_distance(p in pmf()) {
        let d = d_statistic(&p);
        prop_assert!((d - 2.0 * exact_tv(&p, &p.shifted(1)).value).abs() < 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
    }

    #[test]
    fn tv_is_a_metric(p in pmf(), q in pmf()) {
        let a = exact_tv(&p, &q).value;
        prop_assert!((a - exact_tv(&q, &p).value).abs() < 1e-15);
        prop_assert!((-1e-15..=1.0 + 1e-12).contains(&a));
        prop_assert!(exact_tv(&p, &p).value == 0.0);
    }

    #[test]
    fn m_star_parity(n in 1usize..10_000) {
        let m = m_star(n);
        prop_assert_eq!(m, if n % 2 == 1 { n / 2 + 1 } else { n / 2 });
    }

    #[test]
    fn panjer_tables_normalize(lambda in 0.05f64..30.0, alpha in 0.2f64..8.0, p in 0.1f64..0.95) {
        for spec in [PanjerPSD::poisson(lambda).unwrap(), PanjerPSD::negative_binomial(alpha, p).unwrap()] {
            let t = pmf_panjer(&spec, 2_000).unwrap();
            prop_assert!((t.total() - 1.0).abs() < 1e-12);
            let (mean, _) = spec.mean_var().unwrap();
            prop_assert!((t.mean() - mean).abs() < 1e-9 * mean.max(1.0));
        }
    }

    #[test]
    fn automaton_counts_patterns(
        pattern in prop::collection::vec(any::<bool>(), 1..5),
        bits in prop::collection::vec(any::<bool>(), 0..60),
    ) {
        let a = RunAutomaton::new(pattern.clone()).unwrap();
        prop_assert_eq!(a.count(&bits), naive_count(&pattern, &bits));
    }

    #[test]
    fn two_runs_closed_forms_match_enumeration(p in prop::collection::vec(0.0f64..=1.0, 3..12)) {
        let model = TwoRunsModel::new(p).unwrap();
        let exact = enumerate_moments(&DependentSequence::exact(Arc::new(model.clone()))).unwrap();
        let closed = model.closed_form_moments().unwrap();
        for (a, b) in exact.per_index.iter().zip(&closed.per_index) {
            for ((_, x), (_, y)) in a.fields().iter().zip(b.fields()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k1k2_summands_are_binary(k1 in 1usize..3, k2 in 1usize..3, blocks in 2usize..5, p in 0.05f64..0.95) {
        let m = k1 + k2 - 1;
        prop_assume!(blocks * m <= 14);
        let model = K1K2Model::iid(k1, k2, blocks - 1, p).unwrap();
        let seq = DependentSequence::exact(Arc::new(model));
        let mut ok = true;
        seq.for_each(|x, _| ok &= x.iter().all(|v| *v <= 1)).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn reports_are_itemized(n in 8usize..40, p in 0.02f64..0.5) {
        let seq = DependentSequence::exact(Arc::new(TwoRunsModel::iid(n, p).unwrap()));
        let ctx = match BoundContext::fitted(seq.clone(), &NbFit) {
            Ok(c) => c,
            Err(_) => BoundContext::fitted(seq, &PoissonFit).unwrap(),
        };
        let moments = ctx.moments().unwrap().clone();
        let reg = VariantRegistry::builtin();
        for v in ["d1", "d2", "crude", "min", "closed-form"] {
            let r = reg.get(v).unwrap().evaluate(&ctx).unwrap();
            prop_assert!(r.is_consistent(1e-12), "{}", v);
            if v == "d1" {
                prop_assert!((r.term_tau - tau_term(&moments, &ctx.target).unwrap()).abs() < 1e-12);
            }
            if v == "min" {
                prop_assert_eq!(r.operands.len(), 2);
                prop_assert!(r.operands.iter().all(|o| r.total <= o.total));
            }
        }
    }
}
