use std::any::Any;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::LocalMoments;
use crate::bound::{check_mean, m_star, tau_term, BoundReport, NbFit, RunsMomentTerms, SmoothingEstimate, SmoothingMethod};
use crate::dependent::{validate_probs, MomentSet, SummandModel};
use crate::error::{Error, Result};
use crate::psd::PanjerPSD;

/// Overlapping success pairs `X_i = η_i η_{i+1}`, `i = 1..n`, over `n + 1`
/// independent trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoRunsModel {
    p: Vec<f64>,
}

impl TwoRunsModel {
    /// `p` holds the `n + 1` trial probabilities.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidArgument("2-runs need at least two trials".into()));
        }
        validate_probs(&p)?;
        Ok(Self { p })
    }

    pub fn iid(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n + 1])
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    /// The shared trial probability, when all trials agree.
    pub fn common_p(&self) -> Option<f64> {
        let first = self.p[0];
        self.p.iter().all(|x| *x == first).then_some(first)
    }

    /// Whether every trial probability is at most 1/2, as the 2-runs
    /// theorem assumes.
    pub fn within_half(&self) -> bool {
        self.p.iter().all(|x| *x <= 0.5)
    }

    /// `p_j`, 1-based, zero outside the trials.
    fn pj(&self, j: isize) -> f64 {
        if j < 1 {
            return 0.0;
        }
        self.p.get(j as usize - 1).copied().unwrap_or(0.0)
    }

    fn run(&self, j: isize, len: isize) -> f64 {
        let n = self.len() as isize;
        if j < 1 || j + len - 2 > n {
            return 0.0;
        }
        (j..j + len).map(|k| self.pj(k)).product()
    }

    fn local(&self, i: usize) -> [f64; 3] {
        let s = |j: isize| self.run(j, 2);
        let d = |j: isize| self.run(j, 3);
        let t = |j: isize| self.run(j, 4);
        LocalMoments { single: &s, pair: &d, triple: &t }.bars(i)
    }

    fn moment_set(&self) -> MomentSet {
        let s = |j: isize| self.run(j, 2);
        let d = |j: isize| self.run(j, 3);
        let t = |j: isize| self.run(j, 4);
        let local = LocalMoments { single: &s, pair: &d, triple: &t };
        MomentSet::from_index_moments((1..=self.len()).map(|i| local.index_moments(i)).collect())
    }
}

impl SummandModel for TwoRunsModel {
    fn kind(&self) -> &'static str {
        "two-runs"
    }

    fn trial_probs(&self) -> &[f64] {
        &self.p
    }

    fn len(&self) -> usize {
        self.p.len() - 1
    }

    fn dependence_radius(&self) -> usize {
        1
    }

    fn trial_window(&self, i: usize) -> Range<usize> {
        i - 1..i + 1
    }

    fn summand(&self, i: usize, trials: &[bool]) -> u32 {
        (trials[i - 1] && trials[i]) as u32
    }

    fn count_pattern(&self) -> Option<Vec<bool>> {
        Some(vec![true, true])
    }

    fn closed_form_moments(&self) -> Option<MomentSet> {
        Some(self.moment_set())
    }

    fn closed_form_smoothing(&self) -> Option<SmoothingEstimate> {
        let c = two_runs_cbar(self.len()).ok()?;
        self.within_half().then(|| SmoothingEstimate::uniform(self.len(), c, SmoothingMethod::ModelClosedForm))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `a_1..a_3` and `ā_1..ā_3` at one index.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoRunsMoments {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub abar1: f64,
    pub abar2: f64,
    pub abar3: f64,
}

pub fn two_runs_moments(model: &TwoRunsModel, i: usize) -> Result<TwoRunsMoments> {
    let n = model.len();
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!("index {i} outside 1..={n}")));
    }
    let k = i as isize;
    let [abar1, abar2, abar3] = model.local(i);
    Ok(TwoRunsMoments { a1: model.run(k, 2), a2: model.run(k, 3), a3: model.run(k, 4), abar1, abar2, abar3 })
}

/// `c̄(n) = 4 min{(m* - 3)^{-1/2}, (⌊n/2⌋ - 3)^{-1/2}}`.
pub fn two_runs_cbar(n: usize) -> Result<f64> {
    if n < 8 {
        return Err(Error::Precondition(format!("c̄(n) requires n ≥ 8, got n = {n}")));
    }
    let a = (m_star(n) - 3) as f64;
    let b = (n / 2 - 3) as f64;
    Ok(4.0 * a.sqrt().recip().min(b.sqrt().recip()))
}

/// `δ {c̄(n) Σ_i [(|1-b|/2)(a_1 ā_1 + ā_2) + ā_3] + |τ(1-b)|}`.
pub fn two_runs_bound(model: &TwoRunsModel, spec: &PanjerPSD, delta_g: f64) -> Result<BoundReport> {
    let n = model.len();
    let cbar = two_runs_cbar(n)?;
    if !model.within_half() {
        return Err(Error::Precondition("the 2-runs bound requires every p_i ≤ 1/2".into()));
    }
    let moments = model.moment_set();
    check_mean(&moments, spec, 1e-9)?;
    let half = 0.5 * (1.0 - spec.b).abs();
    let mut quad = 0.0;
    let mut lin = 0.0;
    let mut terms = Vec::with_capacity(n);
    for i in 1..=n {
        let m = two_runs_moments(model, i)?;
        quad += half * (m.a1 * m.abar1 + m.abar2);
        lin += m.abar3;
        terms.push(RunsMomentTerms { i, mean: m.a1, bar1: m.abar1, bar2: m.abar2, bar3: m.abar3 });
    }
    let tau = tau_term(&moments, spec)?;
    let mut r = BoundReport::assemble("closed-form", n, spec.a, spec.b, delta_g, [cbar * quad, cbar * lin, tau]);
    r.smoothing = vec![cbar; n];
    r.c_constant = Some(cbar);
    r.moment_terms = Some(terms);
    Ok(r)
}

/// `Var R_n = n p^2 (1 - p^2) + 2(n - 1)(p^3 - p^4)` for identical trials.
pub fn two_runs_variance_iid(n: usize, p: f64) -> f64 {
    let n = n as f64;
    n * p * p * (1.0 - p * p) + 2.0 * (n - 1.0) * (p.powi(3) - p.powi(4))
}

/// Negative binomial with the mean and variance of `R_n`.
pub fn nb_moment_match_2runs(n: usize, p: f64) -> Result<PanjerPSD> {
    if !(p > 0.0 && p <= 0.5) || n == 0 {
        return Err(Error::Precondition(format!("NB matching needs n ≥ 1 and 0 < p ≤ 1/2, got ({n}, {p})")));
    }
    NbFit::from_mean_var(n as f64 * p * p, two_runs_variance_iid(n, p))
}

fn check_cell(n: usize, p: f64) -> Result<()> {
    if n < 8 || !(0.0..=0.5).contains(&p) {
        return Err(Error::Precondition(format!("the closed form requires n ≥ 8 and 0 ≤ p ≤ 1/2, got ({n}, {p})")));
    }
    Ok(())
}

/// `4p (⌊n/2⌋ - 3)^{-1/2} (4 + 11p + 4p^2 - p^3)`.
pub fn nb_bound_closed_form(n: usize, p: f64) -> Result<f64> {
    check_cell(n, p)?;
    let c = ((n / 2 - 3) as f64).sqrt();
    Ok(4.0 * p / c * (4.0 + 11.0 * p + 4.0 * p * p - p.powi(3)))
}

/// [`nb_bound_closed_form`] itemized: `‖Δg‖ = (1+2p-3p^2)/(np^2)`,
/// `|1-b| = p̄ = 1/(1+2p-3p^2)`, smoothing `4(⌊n/2⌋-3)^{-1/2}`, `τ = 0`.
pub fn nb_bound_report(n: usize, p: f64) -> Result<BoundReport> {
    check_cell(n, p)?;
    let c = 4.0 / ((n / 2 - 3) as f64).sqrt();
    let mut r = if p == 0.0 {
        BoundReport::assemble("closed-form", n, 0.0, 0.0, 0.0, [0.0; 3])
    } else {
        let nf = n as f64;
        let s = 1.0 + 2.0 * p - 3.0 * p * p;
        let p_bar = 1.0 / s;
        let delta = s / (nf * p * p);
        let quad = c * nf * 0.5 * p_bar * (4.0 * p.powi(3) + 10.0 * p.powi(4) + 12.0 * p.powi(5) + 10.0 * p.powi(6));
        let lin = c * nf * 2.0 * (p.powi(3) + p.powi(4));
        BoundReport::assemble("closed-form", n, 1.0 / delta, 1.0 - p_bar, delta, [quad, lin, 0.0])
    };
    r.c_constant = Some(c);
    r.comparison = brown_xia_bound(n, p).ok();
    Ok(r)
}

/// `32.2 p / √((n-1)(1-p)^3)`, valid for `n ≥ 2`, `p < 2/3`.
pub fn brown_xia_bound(n: usize, p: f64) -> Result<f64> {
    if n < 2 || !(0.0..2.0 / 3.0).contains(&p) {
        return Err(Error::Precondition(format!("the comparison bound requires n ≥ 2 and 0 ≤ p < 2/3, got ({n}, {p})")));
    }
    Ok(32.2 * p / ((n as f64 - 1.0) * (1.0 - p).powi(3)).sqrt())
}
