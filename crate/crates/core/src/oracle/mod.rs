//! Exact engines that the closed forms and bounds are checked against.

mod automaton;
mod conditional;

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub use automaton::{naive_count, RunAutomaton};
pub use conditional::{conditional_terms, exact_conditional_d, ConditionalTerms, Conditioning, ConditionalLaw};

use crate::dependent::{enumerate_moments, DependentSequence, MomentSet, SummandModel};
use crate::enumerate::for_each_outcome;
use crate::error::{Error, Result};
use crate::pmf::PmfTable;

/// Law of the automaton count over independent trials, by forward dynamic
/// programming over `(state, count)`.
pub fn dp_law<T: Num + Clone>(automaton: &RunAutomaton, probs: &[T]) -> Vec<T> {
    let states = automaton.states();
    let max_count = probs.len() + 1;
    let mut cur = vec![vec![T::zero(); max_count]; states];
    cur[0][0] = T::one();
    for p in probs {
        let mut nxt = vec![vec![T::zero(); max_count]; states];
        let q = T::one() - p.clone();
        for (s, row) in cur.iter().enumerate() {
            for (c, mass) in row.iter().enumerate() {
                if mass.is_zero() {
                    continue;
                }
                for (bit, w) in [(false, &q), (true, p)] {
                    if w.is_zero() {
                        continue;
                    }
                    let (t, inc) = automaton.step(s, bit);
                    let slot = &mut nxt[t][c + inc as usize];
                    *slot = slot.clone() + mass.clone() * w.clone();
                }
            }
        }
        cur = nxt;
    }
    let mut law = vec![T::zero(); max_count];
    for row in cur {
        for (c, mass) in row.into_iter().enumerate() {
            law[c] = law[c].clone() + mass;
        }
    }
    trim(law)
}

fn trim<T: Num>(mut law: Vec<T>) -> Vec<T> {
    while law.len() > 1 && law.last().is_some_and(|x| x.is_zero()) {
        law.pop();
    }
    law
}

pub fn dp_distribution(automaton: &RunAutomaton, probs: &[f64]) -> Result<PmfTable> {
    PmfTable::exact(dp_law(automaton, probs))
}

/// Law of `W` by visiting every trial outcome and summing the summands.
pub fn brute_force_law<T: Num + Clone>(model: &dyn SummandModel, probs: &[T], limit: u64) -> Result<Vec<T>> {
    if probs.len() != model.trial_probs().len() {
        return Err(Error::InvalidArgument("probability vector length differs from the model".into()));
    }
    let mut law: Vec<T> = vec![T::zero()];
    for_each_outcome(probs, limit, |bits, mass| {
        let w = (1..=model.len()).map(|i| model.summand(i, bits)).sum::<u32>() as usize;
        if law.len() <= w {
            law.resize(w + 1, T::zero());
        }
        law[w] = law[w].clone() + mass.clone();
    })?;
    Ok(trim(law))
}

pub fn brute_force_distribution(model: &dyn SummandModel, limit: u64) -> Result<PmfTable> {
    PmfTable::exact(brute_force_law(model, model.trial_probs(), limit)?)
}

/// Exact rational images of the trial probabilities (every `f64` is a
/// dyadic rational, so this loses nothing).
pub fn exact_probs(p: &[f64]) -> Result<Vec<BigRational>> {
    p.iter()
        .map(|x| BigRational::from_f64(*x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite"))))
        .collect()
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Law of `W`: automaton DP when the model counts a pattern, otherwise
/// full enumeration.
pub fn model_law(model: &dyn SummandModel, limit: u64) -> Result<PmfTable> {
    match model.count_pattern() {
        Some(pattern) => dp_distribution(&RunAutomaton::new(pattern)?, model.trial_probs()),
        None => brute_force_distribution(model, limit),
    }
}

/// Every moment field by direct expectation over the joint law.
pub fn moment_oracle(model: Arc<dyn SummandModel>, limit: u64) -> Result<MomentSet> {
    enumerate_moments(&DependentSequence::exact(model).with_max_outcomes(limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependent::BernoulliProduct;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn two_runs_three_trials() {
        let a = RunAutomaton::new(vec![true, true]).unwrap();
        let law = dp_law(&a, &[r(1, 2), r(1, 2), r(1, 2)]);
        assert_eq!(law, vec![r(5, 8), r(2, 8), r(1, 8)]);
        let zero = dp_distribution(&a, &[0.0; 5]).unwrap();
        assert_eq!(zero.masses, vec![1.0]);
    }

    #[test]
    fn pattern_01_three_trials() {
        let a = RunAutomaton::new(vec![false, true]).unwrap();
        let law = dp_law(&a, &vec![r(1, 2); 3]);
        // strings with one "01": 001, 010, 011, 101
        assert_eq!(law, vec![r(4, 8), r(4, 8)]);
    }

    #[test]
    fn brute_force_matches_dp_for_products() {
        let p = vec![0.1, 0.7, 0.25, 0.5];
        let model = BernoulliProduct::new(p.clone()).unwrap();
        let exact = exact_probs(&p).unwrap();
        let bf = brute_force_law(&model, &exact, 1 << 10).unwrap();
        let dp = dp_law(&RunAutomaton::new(vec![true]).unwrap(), &exact);
        assert_eq!(bf, dp);
    }
}
