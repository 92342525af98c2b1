use std::any::Any;
use std::collections::HashMap;
use std::ops::{Range, RangeInclusive};

use serde::{Deserialize, Serialize};

use super::LocalMoments;
use crate::bound::{check_mean, m_star, tau_term, BoundReport, RunsMomentTerms, SmoothingEstimate, SmoothingMethod};
use crate::dependent::{validate_probs, MomentSet, SummandModel};
use crate::enumerate::for_each_outcome;
use crate::error::{Error, Result};
use crate::psd::PanjerPSD;

/// Longest local window `ā` is computed over, in trials.
const LOCAL_TRIAL_LIMIT: usize = 24;

fn shape(k1: usize, k2: usize, trials: usize) -> Result<(usize, usize)> {
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidArgument(format!("k1 and k2 must be positive, got ({k1}, {k2})")));
    }
    let m = k1 + k2 - 1;
    if trials % m != 0 || trials < 2 * m {
        return Err(Error::InvalidArgument(format!(
            "need (n+1)·{m} trials for some n ≥ 1, got {trials}"
        )));
    }
    Ok((m, trials / m - 1))
}

/// `Y_j = 1` when trials `j..j+k1-1` fail and `j+k1..j+m` succeed (1-based).
fn indicator(k1: usize, m: usize, j: usize, trials: &[bool]) -> bool {
    let s = j - 1;
    trials[s..s + k1].iter().all(|t| !t) && trials[s + k1..=s + m].iter().all(|t| *t)
}

fn pattern(k1: usize, k2: usize) -> Vec<bool> {
    std::iter::repeat(false).take(k1).chain(std::iter::repeat(true).take(k2)).collect()
}

/// The `nm` m-dependent indicators `Y_1, ..., Y_{nm}` before blocking.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternIndicators {
    pub k1: usize,
    pub k2: usize,
    p: Vec<f64>,
    m: usize,
    n: usize,
}

impl PatternIndicators {
    pub fn new(k1: usize, k2: usize, p: Vec<f64>) -> Result<Self> {
        let (m, n) = shape(k1, k2, p.len())?;
        validate_probs(&p)?;
        Ok(Self { k1, k2, p, m, n })
    }
}

impl SummandModel for PatternIndicators {
    fn kind(&self) -> &'static str {
        "pattern-indicators"
    }

    fn trial_probs(&self) -> &[f64] {
        &self.p
    }

    fn len(&self) -> usize {
        self.n * self.m
    }

    fn dependence_radius(&self) -> usize {
        self.m
    }

    fn trial_window(&self, j: usize) -> Range<usize> {
        j - 1..j + self.m
    }

    fn summand(&self, j: usize, trials: &[bool]) -> u32 {
        indicator(self.k1, self.m, j, trials) as u32
    }

    fn count_pattern(&self) -> Option<Vec<bool>> {
        Some(pattern(self.k1, self.k2))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Block sums `X_i = Y_{(i-1)m+1} + ... + Y_{im}` of (k1, k2) pattern
/// indicators over `(n+1)m` trials, `m = k1 + k2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct K1K2Model {
    pub k1: usize,
    pub k2: usize,
    p: Vec<f64>,
    m: usize,
    n: usize,
}

impl K1K2Model {
    /// `p` holds all `(n+1)m` trial probabilities.
    pub fn new(k1: usize, k2: usize, p: Vec<f64>) -> Result<Self> {
        let (m, n) = shape(k1, k2, p.len())?;
        validate_probs(&p)?;
        Ok(Self { k1, k2, p, m, n })
    }

    pub fn iid(k1: usize, k2: usize, n: usize, p: f64) -> Result<Self> {
        Self::new(k1, k2, vec![p; (n + 1) * (k1 + k2 - 1)])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn block(&self, i: usize) -> RangeInclusive<usize> {
        (i - 1) * self.m + 1..=i * self.m
    }

    /// `a(p_ℓ) = P(Y_ℓ = 1)`, zero outside `1..=nm`.
    pub fn a(&self, l: usize) -> f64 {
        if l == 0 || l > self.n * self.m {
            return 0.0;
        }
        let s = l - 1;
        let fail: f64 = self.p[s..s + self.k1].iter().map(|p| 1.0 - p).product();
        let succ: f64 = self.p[s + self.k1..=s + self.m].iter().product();
        fail * succ
    }

    fn in_range(&self, i: isize, span: isize) -> Option<usize> {
        (i >= 1 && i + span <= self.n as isize).then_some(i as usize)
    }

    /// `a*(p_i) = E X_i`.
    fn single(&self, i: isize) -> f64 {
        self.in_range(i, 0).map_or(0.0, |i| self.block(i).map(|l| self.a(l)).sum())
    }

    /// `E X_i X_{i+1}`: occurrences in consecutive blocks at least `m + 1`
    /// apart, which use disjoint trials.
    fn pair(&self, i: isize) -> f64 {
        let Some(i) = self.in_range(i, 1) else { return 0.0 };
        let m = self.m;
        self.block(i)
            .map(|l1| self.a(l1) * ((l1 + m + 1).max(i * m + 1)..=(i + 1) * m).map(|l2| self.a(l2)).sum::<f64>())
            .sum()
    }

    /// `E X_i X_{i+1} X_{i+2}`.
    fn triple(&self, i: isize) -> f64 {
        let Some(i) = self.in_range(i, 2) else { return 0.0 };
        let m = self.m;
        let mut acc = 0.0;
        for l1 in self.block(i) {
            for l2 in (l1 + m + 1).max(i * m + 1)..=(i + 1) * m {
                let inner: f64 = ((l2 + m + 1).max((i + 1) * m + 1)..=(i + 2) * m).map(|l3| self.a(l3)).sum();
                acc += self.a(l1) * self.a(l2) * inner;
            }
        }
        acc
    }

    fn with_local<T>(&self, f: impl FnOnce(&LocalMoments) -> T) -> T {
        let s = |j: isize| self.single(j);
        let d = |j: isize| self.pair(j);
        let t = |j: isize| self.triple(j);
        f(&LocalMoments { single: &s, pair: &d, triple: &t })
    }
}

impl SummandModel for K1K2Model {
    fn kind(&self) -> &'static str {
        "k1k2-runs"
    }

    fn trial_probs(&self) -> &[f64] {
        &self.p
    }

    fn len(&self) -> usize {
        self.n
    }

    fn dependence_radius(&self) -> usize {
        1
    }

    fn trial_window(&self, i: usize) -> Range<usize> {
        (i - 1) * self.m..(i + 1) * self.m
    }

    fn summand(&self, i: usize, trials: &[bool]) -> u32 {
        self.block(i).filter(|&l| indicator(self.k1, self.m, l, trials)).count() as u32
    }

    fn count_pattern(&self) -> Option<Vec<bool>> {
        Some(pattern(self.k1, self.k2))
    }

    fn closed_form_moments(&self) -> Option<MomentSet> {
        Some(self.with_local(|l| MomentSet::from_index_moments((1..=self.n).map(|i| l.index_moments(i)).collect())))
    }

    fn closed_form_smoothing(&self) -> Option<SmoothingEstimate> {
        k1k2_smoothing(self).ok()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `a*`, its pair and triple versions, and `a*_1..a*_3` at one index.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct K1K2Moments {
    pub a_star: f64,
    pub a_star_pair: f64,
    pub a_star_triple: f64,
    pub a1_star: f64,
    pub a2_star: f64,
    pub a3_star: f64,
}

pub fn k1k2_moments(model: &K1K2Model, i: usize) -> Result<K1K2Moments> {
    let n = model.n;
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!("index {i} outside 1..={n}")));
    }
    let k = i as isize;
    let [a1_star, a2_star, a3_star] = model.with_local(|l| l.bars(i));
    Ok(K1K2Moments {
        a_star: model.single(k),
        a_star_pair: model.pair(k),
        a_star_triple: model.triple(k),
        a1_star,
        a2_star,
        a3_star,
    })
}

/// `ā(p_{2j-1})`: the largest `P(X_{2j-1} = 0 | X_{2j-2}, X_{2j})` over
/// attainable neighbour values, by enumerating the trials the three blocks
/// read.
pub fn k1k2_abar(model: &K1K2Model, j: usize) -> Result<f64> {
    let b = 2 * j - 1;
    if j == 0 || b > model.n {
        return Err(Error::InvalidArgument(format!("block {b} outside 1..={}", model.n)));
    }
    let lo = b.saturating_sub(2) * model.m;
    let hi = ((b + 1) * model.m).min(model.p.len());
    if hi - lo > LOCAL_TRIAL_LIMIT {
        return Err(Error::TooLarge { trials: hi - lo, limit: 1 << LOCAL_TRIAL_LIMIT });
    }
    let neighbours: Vec<usize> = [b.wrapping_sub(1), b + 1].into_iter().filter(|&k| k >= 1 && k <= model.n).collect();
    let mut full = vec![false; model.p.len()];
    let mut cells: HashMap<Vec<u32>, (f64, f64)> = HashMap::new();
    for_each_outcome(&model.p[lo..hi], 1 << LOCAL_TRIAL_LIMIT, |bits, prob: &f64| {
        full[lo..hi].copy_from_slice(bits);
        let key = neighbours.iter().map(|&k| model.summand(k, &full)).collect();
        let cell = cells.entry(key).or_default();
        cell.0 += prob;
        if model.summand(b, &full) == 0 {
            cell.1 += prob;
        }
    })?;
    Ok(cells.values().filter(|c| c.0 > 0.0).map(|c| c.1 / c.0).fold(0.0, f64::max))
}

fn v_star(abar: &[f64], set: impl Iterator<Item = usize>) -> f64 {
    let s: f64 = set.map(|j| 1.0 - abar[j - 1]).sum();
    if s > 0.0 {
        2.0 / (0.5 * s.min(1.0)).sqrt()
    } else {
        f64::INFINITY
    }
}

fn check_k1k2(model: &K1K2Model) -> Result<()> {
    if model.n < 3 * model.m {
        return Err(Error::Precondition(format!(
            "the (k1, k2)-runs bound requires n ≥ 3m = {}, got n = {}",
            3 * model.m,
            model.n
        )));
    }
    for b in (1..=model.n).step_by(2) {
        let a = model.single(b as isize);
        if a > 1.0 / 3.0 {
            return Err(Error::Precondition(format!("the (k1, k2)-runs bound requires a*(p_{b}) ≤ 1/3, got {a}")));
        }
    }
    Ok(())
}

fn ci_star_all(model: &K1K2Model) -> Result<Vec<f64>> {
    check_k1k2(model)?;
    let n = model.n;
    let abar = (1..=m_star(n)).map(|j| k1k2_abar(model, j)).collect::<Result<Vec<_>>>()?;
    let far = |i: usize| move |j: &usize| j.abs_diff(i) > 2;
    Ok((1..=n)
        .map(|i| {
            let even = v_star(&abar, (1..=m_star(n)).filter(far(i)));
            let odd = v_star(&abar, (1..=n / 2).filter(far(i)));
            even.min(odd)
        })
        .collect())
}

/// `c*_i(n) = min{V*_{i,e}, V*_{i,o}}` with
/// `V* = 2 (½ min{1, Σ_{j∈C} (1 - ā(p_{2j-1}))})^{-1/2}`; infinite when
/// both index sets are empty.
pub fn k1k2_ci_star(model: &K1K2Model, i: usize) -> Result<f64> {
    if i == 0 || i > model.n {
        return Err(Error::InvalidArgument(format!("index {i} outside 1..={}", model.n)));
    }
    Ok(ci_star_all(model)?[i - 1])
}

/// `c*_i(n)` for every index, capped at 2.
pub fn k1k2_smoothing(model: &K1K2Model) -> Result<SmoothingEstimate> {
    Ok(SmoothingEstimate::new(ci_star_all(model)?.into_iter().map(|c| (c, SmoothingMethod::ModelClosedForm)).collect()))
}

/// `δ {Σ_i c*_i [(|1-b|/2)(a* a*_1 + a*_2) + a*_3] + |τ(1-b)|}` with each
/// `c*_i` capped at 2.
pub fn k1k2_bound(model: &K1K2Model, spec: &PanjerPSD, delta_g: f64) -> Result<BoundReport> {
    let smoothing = k1k2_smoothing(model)?;
    let moments = model.closed_form_moments().expect("closed form always exists");
    check_mean(&moments, spec, 1e-9)?;
    let half = 0.5 * (1.0 - spec.b).abs();
    let mut quad = 0.0;
    let mut lin = 0.0;
    let mut terms = Vec::with_capacity(model.n);
    for i in 1..=model.n {
        let m = k1k2_moments(model, i)?;
        let c = smoothing.c(i);
        quad += c * half * (m.a_star * m.a1_star + m.a2_star);
        lin += c * m.a3_star;
        terms.push(RunsMomentTerms { i, mean: m.a_star, bar1: m.a1_star, bar2: m.a2_star, bar3: m.a3_star });
    }
    let tau = tau_term(&moments, spec)?;
    let mut r = BoundReport::assemble("closed-form", model.n, spec.a, spec.b, delta_g, [quad, lin, tau]);
    r.smoothing = smoothing.values();
    r.moment_terms = Some(terms);
    Ok(r)
}
