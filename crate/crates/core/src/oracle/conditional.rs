use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dependent::{neighborhood, DependentSequence};
use crate::error::{Error, Result};

/// What `W` is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// `X_{N_{i,2}}`
    N2,
    /// `(X_{N_{i,1}}, X_{N_{i,2}})`
    N1N2,
    /// `X_{N_{i,2}}` and every even-indexed summand.
    Even,
    /// `X_{N_{i,2}}` and every odd-indexed summand.
    Odd,
}

/// `D` of the conditional law of `W` on one attainable condition value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLaw {
    pub condition: Vec<u32>,
    pub probability: f64,
    pub d: f64,
}

/// Unnormalized sub-law of `W` on one conditioning cell.
#[derive(Debug, Clone, Default)]
struct Cell {
    prob: f64,
    ex: f64,
    law: Vec<f64>,
}

impl Cell {
    fn add(&mut self, w: usize, xi: u32, p: f64) {
        self.prob += p;
        self.ex += p * xi as f64;
        if self.law.len() <= w {
            self.law.resize(w + 1, 0.0);
        }
        self.law[w] += p;
    }

    /// `Σ_k |q_k - q_{k-1}|` of the normalized law.
    fn d(&self) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for &x in &self.law {
            acc += (x - prev).abs();
            prev = x;
        }
        (acc + prev) / self.prob
    }
}

fn key(x: &[u32], i: usize, cond: Conditioning) -> Vec<u32> {
    let n = x.len();
    let s1 = neighborhood(n, i, 1).eval(x);
    let s2 = neighborhood(n, i, 2).eval(x);
    match cond {
        Conditioning::N2 => vec![s2],
        Conditioning::N1N2 => vec![s1, s2],
        Conditioning::Even => std::iter::once(s2).chain(x.iter().skip(1).step_by(2).copied()).collect(),
        Conditioning::Odd => std::iter::once(s2).chain(x.iter().step_by(2).copied()).collect(),
    }
}

/// Exact `D(W | condition)` for each attainable condition value, ordered by
/// condition.
pub fn exact_conditional_d(seq: &DependentSequence, i: usize, cond: Conditioning) -> Result<Vec<ConditionalLaw>> {
    let n = seq.len();
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!("index {i} outside 1..={n}")));
    }
    let mut cells: HashMap<Vec<u32>, Cell> = HashMap::new();
    seq.for_each(|x, p| {
        let w: u32 = x.iter().sum();
        cells.entry(key(x, i, cond)).or_default().add(w as usize, x[i - 1], p);
    })?;
    let mut out: Vec<ConditionalLaw> = cells
        .into_iter()
        .filter(|(_, c)| c.prob > 0.0)
        .map(|(condition, c)| ConditionalLaw { condition, probability: c.prob, d: c.d() })
        .collect();
    out.sort_by(|a, b| a.condition.cmp(&b.condition));
    Ok(out)
}

/// Per-index expectations in which the conditional `D` values enter the
/// bound, computed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConditionalTerms {
    /// `E[X_{N_{i,1}}(2X_{N_{i,2}} - X_{N_{i,1}} - 1) D(W | X_{N_{i,1}}, X_{N_{i,2}})]`
    pub bracket_n1: f64,
    /// `E[X_i X_{N_{i,1}}(2X_{N_{i,2}} - X_{N_{i,1}} - 1) D(W | X_{N_{i,1}}, X_{N_{i,2}})]`
    pub bracket_x_n1: f64,
    /// `E[X_i (X_{N_{i,2}} - 1) D(W | X_{N_{i,2}})]`
    pub x_n2_minus_1: f64,
    /// `max D(W | X_{N_{i,2}})` over attainable values.
    pub sup_d_n2: f64,
    /// `max D(W | X_{N_{i,1}}, X_{N_{i,2}})` over attainable values.
    pub sup_d_n1n2: f64,
}

/// Conditional terms for every index in one enumeration pass.
pub fn conditional_terms(seq: &DependentSequence) -> Result<Vec<ConditionalTerms>> {
    let n = seq.len();
    let mut pair_cells: Vec<HashMap<(u32, u32), Cell>> = vec![HashMap::new(); n];
    let mut n2_cells: Vec<HashMap<u32, Cell>> = vec![HashMap::new(); n];
    seq.for_each(|x, p| {
        let w = x.iter().sum::<u32>() as usize;
        for i in 1..=n {
            let s1 = neighborhood(n, i, 1).eval(x);
            let s2 = neighborhood(n, i, 2).eval(x);
            pair_cells[i - 1].entry((s1, s2)).or_default().add(w, x[i - 1], p);
            n2_cells[i - 1].entry(s2).or_default().add(w, x[i - 1], p);
        }
    })?;
    let mut out = Vec::with_capacity(n);
    for (pairs, singles) in pair_cells.iter().zip(&n2_cells) {
        let mut t = ConditionalTerms::default();
        let mut sorted: Vec<_> = pairs.iter().filter(|(_, c)| c.prob > 0.0).collect();
        sorted.sort_by_key(|(k, _)| **k);
        for (&(s1, s2), cell) in sorted {
            let d = cell.d();
            let weight = (s1 as i64 * (2 * s2 as i64 - s1 as i64 - 1)) as f64;
            t.bracket_n1 += cell.prob * weight * d;
            t.bracket_x_n1 += cell.ex * weight * d;
            t.sup_d_n1n2 = t.sup_d_n1n2.max(d);
        }
        let mut sorted: Vec<_> = singles.iter().filter(|(_, c)| c.prob > 0.0).collect();
        sorted.sort_by_key(|(k, _)| **k);
        for (&s2, cell) in sorted {
            let d = cell.d();
            t.x_n2_minus_1 += cell.ex * (s2 as f64 - 1.0) * d;
            t.sup_d_n2 = t.sup_d_n2.max(d);
        }
        out.push(t);
    }
    Ok(out)
}
