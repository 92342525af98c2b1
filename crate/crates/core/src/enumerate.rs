//! Depth-first enumeration of independent Bernoulli trial outcomes.

use num_traits::Num;

use crate::error::{Error, Result};

/// Default refusal threshold for full enumeration.
pub const DEFAULT_MAX_OUTCOMES: u64 = 1 << 24;

/// Number of outcomes with positive probability, `2^(#trials with 0 < p < 1)`.
pub fn outcome_count<T: Num>(probs: &[T]) -> u64 {
    let free = probs.iter().filter(|p| !p.is_zero() && !p.is_one()).count() as u32;
    1u64.checked_shl(free).unwrap_or(u64::MAX)
}

pub fn check_enumerable<T: Num>(probs: &[T], limit: u64) -> Result<()> {
    let count = outcome_count(probs);
    if count > limit {
        let trials = probs.iter().filter(|p| !p.is_zero() && !p.is_one()).count();
        return Err(Error::TooLarge { trials, limit });
    }
    Ok(())
}

/// Calls `visit(outcome, probability)` for every trial outcome of positive
/// probability. Branches of probability zero are never entered, so trials
/// with `p` in `{0, 1}` cost nothing.
pub fn for_each_outcome<T, F>(probs: &[T], limit: u64, mut visit: F) -> Result<()>
where
    T: Num + Clone,
    F: FnMut(&[bool], &T),
{
    check_enumerable(probs, limit)?;
    let mut bits = vec![false; probs.len()];
    walk(probs, 0, &mut bits, T::one(), &mut visit);
    Ok(())
}

fn walk<T, F>(probs: &[T], depth: usize, bits: &mut Vec<bool>, mass: T, visit: &mut F)
where
    T: Num + Clone,
    F: FnMut(&[bool], &T),
{
    if depth == probs.len() {
        visit(bits, &mass);
        return;
    }
    let p = &probs[depth];
    if !p.is_one() {
        bits[depth] = false;
        walk(probs, depth + 1, bits, mass.clone() * (T::one() - p.clone()), visit);
    }
    if !p.is_zero() {
        bits[depth] = true;
        walk(probs, depth + 1, bits, mass * p.clone(), visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_degenerate_trials() {
        let mut seen = 0;
        let mut total = 0.0;
        for_each_outcome(&[0.5, 1.0, 0.0, 0.25], 16, |bits, p| {
            assert!(bits[1] && !bits[2]);
            seen += 1;
            total += p;
        })
        .unwrap();
        assert_eq!(seen, 4);
        assert!((total - 1.0f64).abs() < 1e-15);
    }

    #[test]
    fn refuses_large_spaces() {
        let probs = vec![0.5f64; 21];
        assert!(matches!(for_each_outcome(&probs, 1 << 20, |_, _| {}), Err(Error::TooLarge { .. })));
    }
}
