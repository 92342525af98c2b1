use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pattern-matching automaton over binary trial strings. State `s` is the
/// length of the longest pattern prefix that is a suffix of the input read
/// so far; entering state `len` completes an occurrence. Overlapping
/// occurrences are counted, so `11` occurs twice in `111`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunAutomaton {
    pattern: Vec<bool>,
    next: Vec<[usize; 2]>,
}

impl RunAutomaton {
    pub fn new(pattern: Vec<bool>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidArgument("pattern must be non-empty".into()));
        }
        let len = pattern.len();
        // failure function
        let mut fail = vec![0usize; len + 1];
        let mut k = 0;
        for q in 1..len {
            while k > 0 && pattern[k] != pattern[q] {
                k = fail[k];
            }
            if pattern[k] == pattern[q] {
                k += 1;
            }
            fail[q + 1] = k;
        }
        let mut next = vec![[0usize; 2]; len + 1];
        for s in 0..=len {
            for c in [false, true] {
                next[s][c as usize] = if s < len && pattern[s] == c {
                    s + 1
                } else if s == 0 {
                    0
                } else {
                    next[fail[s]][c as usize]
                };
            }
        }
        Ok(Self { pattern, next })
    }

    /// `0^{k1} 1^{k2}`.
    pub fn failures_then_successes(k1: usize, k2: usize) -> Result<Self> {
        let mut p = vec![false; k1];
        p.extend(std::iter::repeat(true).take(k2));
        Self::new(p)
    }

    pub fn pattern(&self) -> &[bool] {
        &self.pattern
    }

    pub fn states(&self) -> usize {
        self.next.len()
    }

    /// `(next state, count increment)`.
    pub fn step(&self, state: usize, bit: bool) -> (usize, u32) {
        let s = self.next[state][bit as usize];
        (s, (s == self.pattern.len()) as u32)
    }

    pub fn count(&self, bits: &[bool]) -> u32 {
        let mut state = 0;
        let mut total = 0;
        for &b in bits {
            let (s, inc) = self.step(state, b);
            state = s;
            total += inc;
        }
        total
    }
}

/// Occurrences of `pattern` starting at every offset, by direct comparison.
pub fn naive_count(pattern: &[bool], bits: &[bool]) -> u32 {
    if pattern.len() > bits.len() {
        return 0;
    }
    bits.windows(pattern.len()).filter(|w| *w == pattern).count() as u32
}
