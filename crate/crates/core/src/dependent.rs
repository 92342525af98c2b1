//! Finite 1-dependent (or blocked m-dependent) sums driven by independent
//! Bernoulli trials, and the neighbourhood moments the bounds consume.
//!
//! Indices `i` are 1-based throughout, matching `X_1, ..., X_n`.

use std::any::Any;
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bound::SmoothingEstimate;
use crate::enumerate::{for_each_outcome, DEFAULT_MAX_OUTCOMES};
use crate::error::{Error, Result};

/// A sum `W = X_1 + ... + X_n` whose summands are functions of a finite
/// string of independent Bernoulli trials.
pub trait SummandModel: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;

    fn trial_probs(&self) -> &[f64];

    /// Number of summands `n`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `m` such that summands more than `m` apart are independent.
    fn dependence_radius(&self) -> usize;

    /// 0-based half-open range of trials that `X_i` reads.
    fn trial_window(&self, i: usize) -> Range<usize>;

    /// `X_i` on a full trial outcome.
    fn summand(&self, i: usize, trials: &[bool]) -> u32;

    /// Binary pattern whose occurrences in the trial string number `W`.
    fn count_pattern(&self) -> Option<Vec<bool>> {
        None
    }

    /// Moments from closed-form expressions, when the model has them.
    fn closed_form_moments(&self) -> Option<MomentSet> {
        None
    }

    /// Smoothing constants from the model's own analysis, when its
    /// preconditions hold.
    fn closed_form_smoothing(&self) -> Option<SmoothingEstimate> {
        None
    }

    fn as_any(&self) -> &dyn Any;

    /// All summands on one outcome.
    fn summands(&self, trials: &[bool]) -> Vec<u32> {
        (1..=self.len()).map(|i| self.summand(i, trials)).collect()
    }
}

pub(crate) fn validate_probs(p: &[f64]) -> Result<()> {
    match p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        Some(x) => Err(Error::InvalidArgument(format!("trial probability {x} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Independent Bernoulli summands, `X_i = η_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliProduct {
    p: Vec<f64>,
}

impl BernoulliProduct {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        validate_probs(&p)?;
        if p.is_empty() {
            return Err(Error::InvalidArgument("need at least one summand".into()));
        }
        Ok(Self { p })
    }
}

impl SummandModel for BernoulliProduct {
    fn kind(&self) -> &'static str {
        "custom-bernoulli-product"
    }

    fn trial_probs(&self) -> &[f64] {
        &self.p
    }

    fn len(&self) -> usize {
        self.p.len()
    }

    fn dependence_radius(&self) -> usize {
        0
    }

    fn trial_window(&self, i: usize) -> Range<usize> {
        i - 1..i
    }

    fn summand(&self, i: usize, trials: &[bool]) -> u32 {
        trials[i - 1] as u32
    }

    fn count_pattern(&self) -> Option<Vec<bool>> {
        Some(vec![true])
    }

    fn closed_form_moments(&self) -> Option<MomentSet> {
        let n = self.p.len();
        let at = |j: isize| if j >= 1 && j as usize <= n { self.p[j as usize - 1] } else { 0.0 };
        let per_index = (1..=n as isize)
            .map(|i| {
                let x = at(i);
                let (l1, r1, l2, r2) = (at(i - 1), at(i + 1), at(i - 2), at(i + 2));
                let e_n1 = l1 + x + r1;
                // N1 squared minus N1 for independent Bernoulli summands.
                let pairs_n1 = 2.0 * (l1 * x + x * r1 + l1 * r1);
                let outer = l2 + r2;
                IndexMoments {
                    e_x: x,
                    e_n1,
                    e_x_n1: x + x * (l1 + r1),
                    bracket_n1: pairs_n1 + 2.0 * e_n1 * outer,
                    bracket_x_n1: 2.0 * x * (l1 + r1 + l1 * r1) + 2.0 * x * (1.0 + l1 + r1) * outer,
                    x_n2_minus_1: x * (l1 + r1 + l2 + r2),
                }
            })
            .collect();
        Some(MomentSet::from_index_moments(per_index))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// How a [`DependentSequence`] produces its law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum Backend {
    Exact { max_outcomes: u64 },
    Sampled { seed: u64, samples: usize },
}

/// A model together with the way its law is accessed.
#[derive(Debug, Clone)]
pub struct DependentSequence {
    pub model: Arc<dyn SummandModel>,
    pub backend: Backend,
}

impl DependentSequence {
    pub fn exact(model: Arc<dyn SummandModel>) -> Self {
        Self { model, backend: Backend::Exact { max_outcomes: DEFAULT_MAX_OUTCOMES } }
    }

    pub fn sampled(model: Arc<dyn SummandModel>, seed: u64, samples: usize) -> Self {
        Self { model, backend: Backend::Sampled { seed, samples } }
    }

    pub fn with_max_outcomes(mut self, max_outcomes: u64) -> Self {
        self.backend = Backend::Exact { max_outcomes };
        self
    }

    pub fn len(&self) -> usize {
        self.model.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model.is_empty()
    }

    pub fn max_outcomes(&self) -> u64 {
        match self.backend {
            Backend::Exact { max_outcomes } => max_outcomes,
            Backend::Sampled { .. } => DEFAULT_MAX_OUTCOMES,
        }
    }

    /// Visits `(X_1..X_n, probability)` for every outcome of positive mass.
    pub fn for_each(&self, mut visit: impl FnMut(&[u32], f64)) -> Result<()> {
        let model = &self.model;
        let mut xs = vec![0u32; model.len()];
        for_each_outcome(model.trial_probs(), self.max_outcomes(), |bits, p| {
            for (i, x) in xs.iter_mut().enumerate() {
                *x = model.summand(i + 1, bits);
            }
            visit(&xs, *p);
        })
    }
}

/// Consecutive blocks of `m` summands of an m-dependent model,
/// `Y*_j = Y_{(j-1)m+1} + ... + Y_{min(jm, n)}`, which are 1-dependent.
#[derive(Debug, Clone)]
pub struct BlockedSequence {
    source: Arc<dyn SummandModel>,
    m: usize,
}

impl BlockedSequence {
    pub fn source(&self) -> &Arc<dyn SummandModel> {
        &self.source
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    /// 1-based source indices of block `j`.
    pub fn block_members(&self, j: usize) -> std::ops::RangeInclusive<usize> {
        (j - 1) * self.m + 1..=(j * self.m).min(self.source.len())
    }
}

/// Groups an m-dependent model into `⌈n/m⌉` 1-dependent blocks; `m = 0`
/// (independent summands) is treated as `m = 1`.
pub fn block_m_dependent(source: Arc<dyn SummandModel>) -> Result<BlockedSequence> {
    if source.is_empty() {
        return Err(Error::InvalidArgument("cannot block an empty sequence".into()));
    }
    let m = source.dependence_radius().max(1);
    Ok(BlockedSequence { source, m })
}

impl SummandModel for BlockedSequence {
    fn kind(&self) -> &'static str {
        "blocked"
    }

    fn trial_probs(&self) -> &[f64] {
        self.source.trial_probs()
    }

    fn len(&self) -> usize {
        self.source.len().div_ceil(self.m)
    }

    fn dependence_radius(&self) -> usize {
        1
    }

    fn trial_window(&self, j: usize) -> Range<usize> {
        let members = self.block_members(j);
        let first = self.source.trial_window(*members.start());
        let last = self.source.trial_window(*members.end());
        first.start.min(last.start)..first.end.max(last.end)
    }

    fn summand(&self, j: usize, trials: &[bool]) -> u32 {
        self.block_members(j).map(|i| self.source.summand(i, trials)).sum()
    }

    fn count_pattern(&self) -> Option<Vec<bool>> {
        self.source.count_pattern()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Handle for `X_{N_{i,ℓ}}`, the sum over `{j : |j - i| <= ℓ} ∩ {1..n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodSum {
    pub first: usize,
    pub last: usize,
}

impl NeighborhoodSum {
    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    /// Value on a vector of summands `x[0] = X_1`.
    pub fn eval(&self, x: &[u32]) -> u32 {
        x[self.first - 1..self.last].iter().sum()
    }
}

pub fn neighborhood(n: usize, i: usize, ell: usize) -> NeighborhoodSum {
    NeighborhoodSum { first: i.saturating_sub(ell).max(1), last: (i + ell).min(n) }
}

pub fn neighborhood_sum(seq: &DependentSequence, i: usize, ell: usize) -> Result<NeighborhoodSum> {
    if ell != 1 && ell != 2 {
        return Err(Error::InvalidArgument(format!("neighbourhood order must be 1 or 2, got {ell}")));
    }
    let n = seq.len();
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!("index {i} outside 1..={n}")));
    }
    Ok(neighborhood(n, i, ell))
}

/// The six per-index moments the bounds need.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexMoments {
    /// `E X_i`
    pub e_x: f64,
    /// `E X_{N_{i,1}}`
    pub e_n1: f64,
    /// `E X_i X_{N_{i,1}}`
    pub e_x_n1: f64,
    /// `E[X_{N_{i,1}}(2X_{N_{i,2}} - X_{N_{i,1}} - 1)]`
    pub bracket_n1: f64,
    /// `E[X_i X_{N_{i,1}}(2X_{N_{i,2}} - X_{N_{i,1}} - 1)]`
    pub bracket_x_n1: f64,
    /// `E[X_i (X_{N_{i,2}} - 1)]`
    pub x_n2_minus_1: f64,
}

impl IndexMoments {
    pub fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("e_x", self.e_x),
            ("e_n1", self.e_n1),
            ("e_x_n1", self.e_x_n1),
            ("bracket_n1", self.bracket_n1),
            ("bracket_x_n1", self.bracket_x_n1),
            ("x_n2_minus_1", self.x_n2_minus_1),
        ]
    }

    fn from_array(v: [f64; 6]) -> Self {
        Self { e_x: v[0], e_n1: v[1], e_x_n1: v[2], bracket_n1: v[3], bracket_x_n1: v[4], x_n2_minus_1: v[5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub per_index: Vec<IndexMoments>,
    pub mean: f64,
    pub variance: f64,
    /// False when the values are Monte-Carlo estimates.
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<Vec<IndexMoments>>,
}

impl MomentSet {
    /// Aggregates from per-index values through
    /// `Var W = Σ_i [E X_i X_{N_{i,1}} - E X_i E X_{N_{i,1}}]`.
    pub fn from_index_moments(per_index: Vec<IndexMoments>) -> Self {
        let mean = per_index.iter().map(|m| m.e_x).sum();
        let variance = per_index.iter().map(|m| m.e_x_n1 - m.e_x * m.e_n1).sum();
        Self { per_index, mean, variance, certified: true, std_errors: None }
    }

    pub fn len(&self) -> usize {
        self.per_index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_index.is_empty()
    }

    /// `Σ_i [E X_i X_{N_{i,1}} - E X_i E X_{N_{i,1}}]`.
    pub fn variance_display(&self) -> f64 {
        self.per_index.iter().map(|m| m.e_x_n1 - m.e_x * m.e_n1).sum()
    }

    pub fn sum_e_x(&self) -> f64 {
        self.per_index.iter().map(|m| m.e_x).sum()
    }
}

fn index_values(x: &[u32], i: usize) -> [f64; 6] {
    let n = x.len();
    let xi = x[i - 1] as i64;
    let n1 = neighborhood(n, i, 1).eval(x) as i64;
    let n2 = neighborhood(n, i, 2).eval(x) as i64;
    let br = n1 * (2 * n2 - n1 - 1);
    [xi as f64, n1 as f64, (xi * n1) as f64, br as f64, (xi * br) as f64, (xi * (n2 - 1)) as f64]
}

/// Exact moments by full enumeration.
pub fn enumerate_moments(seq: &DependentSequence) -> Result<MomentSet> {
    let n = seq.len();
    let mut acc = vec![[0.0f64; 6]; n];
    let (mut ew, mut ew2) = (0.0, 0.0);
    seq.for_each(|x, p| {
        let w: u32 = x.iter().sum();
        ew += p * w as f64;
        ew2 += p * (w as f64) * (w as f64);
        for (i, a) in acc.iter_mut().enumerate() {
            let v = index_values(x, i + 1);
            for (s, vi) in a.iter_mut().zip(v) {
                *s += p * vi;
            }
        }
    })?;
    let per_index = acc.into_iter().map(IndexMoments::from_array).collect();
    Ok(MomentSet { per_index, mean: ew, variance: ew2 - ew * ew, certified: true, std_errors: None })
}

/// Monte-Carlo moments with standard errors; flagged non-certified.
pub fn sample_moments(model: &dyn SummandModel, seed: u64, samples: usize) -> Result<MomentSet> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = model.len();
    let probs = model.trial_probs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![[0.0f64; 6]; n];
    let mut sq = vec![[0.0f64; 6]; n];
    let (mut sw, mut sw2) = (0.0, 0.0);
    let mut bits = vec![false; probs.len()];
    for _ in 0..samples {
        for (b, p) in bits.iter_mut().zip(probs) {
            *b = rng.gen_bool(*p);
        }
        let x = model.summands(&bits);
        let w = x.iter().sum::<u32>() as f64;
        sw += w;
        sw2 += w * w;
        for i in 0..n {
            let v = index_values(&x, i + 1);
            for k in 0..6 {
                sum[i][k] += v[k];
                sq[i][k] += v[k] * v[k];
            }
        }
    }
    let s = samples as f64;
    let mut per_index = Vec::with_capacity(n);
    let mut errors = Vec::with_capacity(n);
    for i in 0..n {
        let mut mean = [0.0; 6];
        let mut se = [0.0; 6];
        for k in 0..6 {
            mean[k] = sum[i][k] / s;
            let var = (sq[i][k] / s - mean[k] * mean[k]).max(0.0) * s / (s - 1.0);
            se[k] = (var / s).sqrt();
        }
        per_index.push(IndexMoments::from_array(mean));
        errors.push(IndexMoments::from_array(se));
    }
    let mean = sw / s;
    Ok(MomentSet {
        per_index,
        mean,
        variance: (sw2 / s - mean * mean) * s / (s - 1.0),
        certified: false,
        std_errors: Some(errors),
    })
}

/// Moments from the model's closed forms when it has them, otherwise by
/// enumeration, otherwise (sampling backend only) by Monte Carlo.
pub fn compute_moments(seq: &DependentSequence) -> Result<MomentSet> {
    if let Some(m) = seq.model.closed_form_moments() {
        return Ok(m);
    }
    match seq.backend {
        Backend::Exact { .. } => enumerate_moments(seq),
        Backend::Sampled { seed, samples } => match enumerate_moments(&seq.clone().with_max_outcomes(1 << 20)) {
            Ok(m) => Ok(m),
            Err(Error::TooLarge { .. }) => sample_moments(seq.model.as_ref(), seed, samples),
            Err(e) => Err(e),
        },
    }
}

/// Largest deviation from factorization `P(prefix, suffix) = P(prefix)P(suffix)`
/// over all splits `X_1..X_i | X_j..X_n` with `j - i > radius`.
pub fn dependence_defect(seq: &DependentSequence, radius: usize) -> Result<f64> {
    let n = seq.len();
    let mut outcomes: Vec<(Vec<u32>, f64)> = Vec::new();
    seq.for_each(|x, p| outcomes.push((x.to_vec(), p)))?;
    let mut worst = 0.0f64;
    for i in 1..=n {
        for j in i + radius + 1..=n {
            let mut joint: HashMap<(&[u32], &[u32]), f64> = HashMap::new();
            let mut left: HashMap<&[u32], f64> = HashMap::new();
            let mut right: HashMap<&[u32], f64> = HashMap::new();
            for (x, p) in &outcomes {
                let (a, b) = (&x[..i], &x[j - 1..]);
                *joint.entry((a, b)).or_default() += p;
                *left.entry(a).or_default() += p;
                *right.entry(b).or_default() += p;
            }
            for (a, pa) in &left {
                for (b, pb) in &right {
                    let pj = joint.get(&(*a, *b)).copied().unwrap_or(0.0);
                    worst = worst.max((pj - pa * pb).abs());
                }
            }
        }
    }
    Ok(worst)
}
