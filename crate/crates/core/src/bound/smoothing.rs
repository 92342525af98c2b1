use serde::{Deserialize, Serialize};

use crate::dependent::DependentSequence;
use crate::error::{Error, Result};
use crate::oracle::{conditional_terms, ConditionalTerms};

/// `m*`: `⌊n/2⌋ + 1` for odd `n`, `n/2` for even `n`.
pub fn m_star(n: usize) -> usize {
    if n % 2 == 1 {
        n / 2 + 1
    } else {
        n / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingMethod {
    ExactConditional,
    RoellinEven,
    RoellinOdd,
    ModelClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingEntry {
    /// Value used in bounds.
    pub c: f64,
    /// Value before capping at 2.
    pub raw: f64,
    pub method: SmoothingMethod,
}

/// Upper bounds `c_i(n)` on the conditional smoothness `D(W | ...)`.
///
/// Any `D` is at most 2, so values above 2 are capped there unless the
/// estimate is built with [`SmoothingEstimate::uncapped`], which reproduces
/// closed-form displays verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingEstimate {
    pub entries: Vec<SmoothingEntry>,
    pub m_star: usize,
}

pub const D_MAX: f64 = 2.0;

impl SmoothingEstimate {
    pub fn new(values: Vec<(f64, SmoothingMethod)>) -> Self {
        let n = values.len();
        let entries = values.into_iter().map(|(raw, method)| SmoothingEntry { c: raw.min(D_MAX), raw, method }).collect();
        Self { entries, m_star: m_star(n) }
    }

    pub fn uniform(n: usize, value: f64, method: SmoothingMethod) -> Self {
        Self::new(vec![(value, method); n])
    }

    /// Keeps values above 2 as they are.
    pub fn uncapped(values: Vec<f64>, method: SmoothingMethod) -> Self {
        let n = values.len();
        let entries = values.into_iter().map(|raw| SmoothingEntry { c: raw, raw, method }).collect();
        Self { entries, m_star: m_star(n) }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `c_i`, 1-based.
    pub fn c(&self, i: usize) -> f64 {
        self.entries[i - 1].c
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.c).collect()
    }
}

/// `2 / √V` with `V = Σ_j min{1/2, 1 - D_j/2}`, the smoothness bound for a
/// sum of independent summands whose individual `D` values are given.
///
/// `1 - D/2 = 1 - d_TV(X, X+1)` is the overlap of a summand with its shift;
/// a Bernoulli(p) summand contributes `min{p, 1-p}`.
pub fn roellin_bound(d_values: &[f64]) -> f64 {
    let v: f64 = d_values.iter().map(|d| 0.5f64.min(1.0 - d / 2.0).max(0.0)).sum();
    if v > 0.0 {
        2.0 / v.sqrt()
    } else {
        f64::INFINITY
    }
}

fn exact_entry(t: &ConditionalTerms) -> (f64, SmoothingMethod) {
    (t.sup_d_n2.max(t.sup_d_n1n2), SmoothingMethod::ExactConditional)
}

/// Smoothing constants for every index: the model's closed form when its
/// preconditions hold, otherwise the exact conditional suprema of
/// `D(W | X_{N_{i,2}})` and `D(W | X_{N_{i,1}}, X_{N_{i,2}})`.
pub fn smoothing_estimate(seq: &DependentSequence) -> Result<SmoothingEstimate> {
    if let Some(s) = seq.model.closed_form_smoothing() {
        return Ok(s);
    }
    exact_smoothing(seq)
}

pub fn exact_smoothing(seq: &DependentSequence) -> Result<SmoothingEstimate> {
    match conditional_terms(seq) {
        Ok(terms) => Ok(SmoothingEstimate::new(terms.iter().map(exact_entry).collect())),
        Err(Error::TooLarge { trials, limit }) => Err(Error::Unavailable(format!(
            "no closed-form smoothing for this model and {trials} trials exceed the enumeration limit {limit}"
        ))),
        Err(e) => Err(e),
    }
}

/// One entry of [`smoothing_estimate`].
pub fn smoothing_roellin(seq: &DependentSequence, i: usize) -> Result<SmoothingEntry> {
    let n = seq.len();
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!("index {i} outside 1..={n}")));
    }
    Ok(smoothing_estimate(seq)?.entries[i - 1])
}
