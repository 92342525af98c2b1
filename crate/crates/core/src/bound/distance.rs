use serde::{Deserialize, Serialize};

use crate::numeric::Neumaier;
use crate::pmf::PmfTable;

/// `D(Y) = 2 d_TV(Y, Y + 1) = Σ_k |p_k - p_{k-1}|`.
pub fn d_statistic(pmf: &PmfTable) -> f64 {
    let mut acc = Neumaier::new();
    let mut prev = 0.0;
    for &p in &pmf.masses {
        acc.add((p - prev).abs());
        prev = p;
    }
    acc.add(prev);
    acc.value()
}

/// Total-variation distance with the interval left open by truncated tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvInterval {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// `½ Σ_k |p_k - q_k|` over the stored ranges. Mass outside the tables and
/// the renormalization it implies can move the true distance by at most
/// the sum of the two tail bounds.
pub fn exact_tv(p: &PmfTable, q: &PmfTable) -> TvInterval {
    let start = p.support_min.min(q.support_min);
    let end = p.end().max(q.end());
    let mut acc = Neumaier::new();
    for k in start..end {
        acc.add((p.pmf(k) - q.pmf(k)).abs());
    }
    let value = 0.5 * acc.value();
    let slack = p.tail_mass_bound + q.tail_mass_bound;
    TvInterval { value, lo: (value - slack).max(0.0), hi: (value + slack).min(1.0) }
}
