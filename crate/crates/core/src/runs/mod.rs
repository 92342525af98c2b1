//! Closed forms for overlapping 2-runs and (k1, k2)-runs.

mod k1k2;
mod table1;
mod two_runs;

pub use k1k2::{
    k1k2_abar, k1k2_bound, k1k2_ci_star, k1k2_moments, k1k2_smoothing, K1K2Model, K1K2Moments, PatternIndicators,
};
pub use table1::{table1, table1_check, Table1Cell, Table1Mismatch, TABLE1_CELLS};
pub use two_runs::{
    brown_xia_bound, nb_bound_closed_form, nb_bound_report, nb_moment_match_2runs, two_runs_bound, two_runs_cbar,
    two_runs_moments, two_runs_variance_iid, TwoRunsModel, TwoRunsMoments,
};

use crate::bound::{BoundContext, BoundReport};
use crate::dependent::{IndexMoments, SummandModel};
use crate::error::{Error, Result};

/// Neighbourhood expectations of a binary 1-dependent sequence from its
/// first, adjacent-pair and adjacent-triple moments.
///
/// With `s(j) = E X_j`, `d(j) = E X_j X_{j+1}` and `t(j) = E X_j X_{j+1} X_{j+2}`
/// (all zero when an index falls outside `1..=n`), independence at lag 2
/// turns the three neighbourhood expectations into
///
/// * `bar1 = 2 Σ_{j=i-2}^{i+1} d(j) + 2[s(i-1)s(i+1) + s(i-2)(s(i)+s(i+1)) + s(i+2)(s(i-1)+s(i))]`
/// * `bar2 = 2 s(i)(s(i-2)+s(i+2)) + 2 d(i-1)(1+s(i+2)) + 2 d(i)(1+s(i-2)) + 2 Σ_{j=i-2}^{i} t(j)`
/// * `bar3 = s(i)(s(i-2)+s(i+2)) + d(i-1) + d(i)`
pub(crate) struct LocalMoments<'a> {
    pub single: &'a dyn Fn(isize) -> f64,
    pub pair: &'a dyn Fn(isize) -> f64,
    pub triple: &'a dyn Fn(isize) -> f64,
}

impl LocalMoments<'_> {
    pub fn bars(&self, i: usize) -> [f64; 3] {
        let i = i as isize;
        let (s, d, t) = (self.single, self.pair, self.triple);
        let bar1 = 2.0 * (i - 2..=i + 1).map(d).sum::<f64>()
            + 2.0 * (s(i - 1) * s(i + 1) + s(i - 2) * (s(i) + s(i + 1)) + s(i + 2) * (s(i - 1) + s(i)));
        let bar2 = 2.0 * s(i) * (s(i - 2) + s(i + 2))
            + 2.0 * d(i - 1) * (1.0 + s(i + 2))
            + 2.0 * d(i) * (1.0 + s(i - 2))
            + 2.0 * (i - 2..=i).map(t).sum::<f64>();
        let bar3 = s(i) * (s(i - 2) + s(i + 2)) + d(i - 1) + d(i);
        [bar1, bar2, bar3]
    }

    pub fn index_moments(&self, i: usize) -> IndexMoments {
        let k = i as isize;
        let (s, d) = (self.single, self.pair);
        let [bar1, bar2, bar3] = self.bars(i);
        IndexMoments {
            e_x: s(k),
            e_n1: s(k - 1) + s(k) + s(k + 1),
            e_x_n1: s(k) + d(k - 1) + d(k),
            bracket_n1: bar1,
            bracket_x_n1: bar2,
            x_n2_minus_1: bar3,
        }
    }
}

/// The model's own closed-form bound: the NB closed form for identical
/// 2-runs fitted by `nb`, the 2-runs theorem for other 2-runs models and
/// the (k1, k2)-runs theorem for those.
pub fn closed_form_bound(ctx: &BoundContext) -> Result<BoundReport> {
    let model = ctx.seq.model.as_any();
    if let Some(m) = model.downcast_ref::<TwoRunsModel>() {
        if let (Some(p), Some("nb")) = (m.common_p(), ctx.fit.as_deref()) {
            return nb_bound_report(m.len(), p);
        }
        return two_runs_bound(m, &ctx.target, ctx.delta_g()?);
    }
    if let Some(m) = model.downcast_ref::<K1K2Model>() {
        return k1k2_bound(m, &ctx.target, ctx.delta_g()?);
    }
    Err(Error::Unavailable(format!("no closed-form bound for model '{}'", ctx.seq.model.kind())))
}
