use super::{PanjerPSD, PowerSeries};
use crate::error::{Error, Result};
use crate::numeric::{DoubleDouble, Neumaier};
use crate::pmf::PmfTable;

/// `(a + b k) g(k+1) - k g(k)`, written through the family's step ratio so
/// that it also covers series-defined families.
pub fn stein_apply(spec: &dyn PowerSeries, g: &dyn Fn(u64) -> f64, k: u64) -> Result<f64> {
    if g(0) != 0.0 {
        return Err(Error::InvalidArgument("Stein functions must vanish at zero".into()));
    }
    Ok(apply_unchecked(spec, g, k))
}

fn apply_unchecked(spec: &dyn PowerSeries, g: &dyn Fn(u64) -> f64, k: u64) -> f64 {
    let r = spec.step_ratio(k);
    let lead = if r == 0.0 { 0.0 } else { r * g(k + 1) };
    lead - k as f64 * g(k)
}

/// Value of `E[A g(Z)]` with a certified bound on everything the finite sum
/// leaves out (truncated tail, table normalization and rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinExpectation {
    pub value: f64,
    pub tail_bound: f64,
}

impl SteinExpectation {
    /// Largest `|E[A g(Z)]|` consistent with the computation.
    pub fn abs_upper(&self) -> f64 {
        self.value.abs() + self.tail_bound
    }
}

/// `E[A g(Z)]` for `g` with `g(0) = 0` and `|g| <= g_bound`.
pub fn stein_expectation(spec: &dyn PowerSeries, g: &dyn Fn(u64) -> f64, g_bound: f64) -> Result<SteinExpectation> {
    if g(0) != 0.0 {
        return Err(Error::InvalidArgument("Stein functions must vanish at zero".into()));
    }
    let table = spec.table(2)?;
    let len = table.masses.len() as u64;
    let complete = spec.support_max().is_some_and(|n| len > n);
    let summed = if complete { len } else { len - 1 };

    let mut acc = Neumaier::new();
    let mut abs = Neumaier::new();
    for k in 0..summed {
        let t = table.pmf(k) * apply_unchecked(spec, g, k);
        acc.add(t);
        abs.add(t.abs());
    }
    let mut tail = 0.0;
    if !complete {
        let last = len - 1;
        let rho = spec
            .tail_ratio_bound(last)
            .filter(|r| *r < 1.0)
            .ok_or_else(|| Error::NonNormalizable("no geometric tail certificate".into()))?;
        let kk = last as f64;
        // Σ_{k>=K} (step(k) + k) p_k <= 2 Σ_{k>=K} k p_k <= 2 p_K Σ_j (K + j) ρ^j
        tail = 2.0 * g_bound * table.pmf(last) * (kk / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho)));
    }
    let rounding = (table.tail_mass_bound + (len as f64 + 8.0) * f64::EPSILON) * abs.value();
    Ok(SteinExpectation { value: acc.value(), tail_bound: tail + rounding })
}

/// Mass table long enough that relative tail error stays negligible next to
/// the smallest mass in `0..end`.
fn deep_table(spec: &dyn PowerSeries, end: u64) -> Result<PmfTable> {
    let first = spec.table(end as usize)?;
    let min_p = (0..end.min(first.end())).map(|k| first.pmf(k)).filter(|p| *p > 0.0).fold(1.0f64, f64::min);
    let eps = (1e-18 * min_p).max(1e-300);
    if eps >= super::TABLE_TAIL_EPS {
        return Ok(first);
    }
    spec.table_with(end as usize, eps)
}

/// Tabulated solution of the Stein equation `A g = f - E f(Z)` on
/// `0..=k_max+1`, so that `Δg(k)` is available for `k <= k_max`.
#[derive(Debug, Clone)]
pub struct SteinSolution {
    ef: f64,
    ef_tolerance: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    forward: Vec<f64>,
    tail: Vec<f64>,
    step: Vec<f64>,
}

/// Solves the Stein equation for bounded `f`.
///
/// Both explicit forms are computed with double-double partial sums: the
/// forward sum over `j < k` and the negated tail sum over `j >= k`. The
/// returned `g` takes the forward form while `F(k-1) <= 1/2` and the tail
/// form afterwards, which keeps the cancellation small in either regime.
/// `ef_tolerance` assumes `|f|` beyond the table stays below its maximum
/// on the table (always true for indicators).
pub fn stein_solve(spec: &dyn PowerSeries, f: &dyn Fn(u64) -> f64, k_max: u64) -> Result<SteinSolution> {
    let end = k_max + 2;
    let table = deep_table(spec, end)?;
    let len = table.masses.len();
    let fv: Vec<f64> = (0..len as u64).map(f).collect();
    if fv.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("test function must be finite".into()));
    }
    let f_max = fv.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut num = DoubleDouble::ZERO;
    let mut den = DoubleDouble::ZERO;
    for (p, fj) in table.masses.iter().zip(&fv) {
        num += DoubleDouble::from_f64(*p).mul_f64(*fj);
        den += DoubleDouble::from_f64(*p);
    }
    let ef = num.div(den);
    let terms: Vec<DoubleDouble> = table
        .masses
        .iter()
        .zip(&fv)
        .map(|(p, fj)| DoubleDouble::from_f64(*p).mul_f64(*fj) - ef.mul_f64(*p))
        .collect();

    let mut back = vec![DoubleDouble::ZERO; len + 1];
    for j in (0..len).rev() {
        back[j] = back[j + 1] + terms[j];
    }

    let n_out = end as usize;
    let (mut g, mut forward, mut tail) = (vec![0.0; n_out], vec![0.0; n_out], vec![0.0; n_out]);
    let mut fwd = DoubleDouble::ZERO;
    let mut cdf = 0.0;
    for k in 0..n_out {
        if k > 0 {
            fwd += terms[k - 1];
            cdf += table.masses[k - 1];
        }
        let pk = table.masses.get(k).copied().unwrap_or(0.0);
        if k == 0 || pk == 0.0 {
            continue;
        }
        let kk = k as f64;
        forward[k] = fwd.div_f64(pk) / kk;
        tail[k] = -back[k].div_f64(pk) / kk;
        g[k] = if cdf <= 0.5 { forward[k] } else { tail[k] };
    }

    let step = (0..end).map(|k| spec.step_ratio(k)).collect();
    let f_out = (0..end).map(|k| fv.get(k as usize).copied().unwrap_or_else(|| f(k))).collect();
    Ok(SteinSolution {
        ef: ef.to_f64(),
        ef_tolerance: 2.0 * f_max * table.tail_mass_bound + 4.0 * f64::EPSILON * f_max,
        f: f_out,
        g,
        forward,
        tail,
        step,
    })
}

impl SteinSolution {
    pub fn ef(&self) -> f64 {
        self.ef
    }

    pub fn ef_tolerance(&self) -> f64 {
        self.ef_tolerance
    }

    /// Largest `k` for which `Δg(k)` is tabulated.
    pub fn k_max(&self) -> u64 {
        self.g.len() as u64 - 2
    }

    pub fn g(&self, k: u64) -> f64 {
        self.g.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn forward(&self, k: u64) -> f64 {
        self.forward.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn tail(&self, k: u64) -> f64 {
        self.tail.get(k as usize).copied().unwrap_or(0.0)
    }

    /// `Δg(k) = g(k+1) - g(k)`.
    pub fn delta(&self, k: u64) -> f64 {
        self.g(k + 1) - self.g(k)
    }

    /// `max_{1<=k<=k_max} |Δg(k)|`.
    pub fn max_abs_delta(&self) -> f64 {
        (1..=self.k_max()).map(|k| self.delta(k).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_g(&self) -> f64 {
        self.g.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `max_{k<=k_max} |A g(k) - (f(k) - E f)|`.
    pub fn residual(&self) -> f64 {
        (0..=self.k_max())
            .map(|k| {
                let i = k as usize;
                let lhs = if self.step[i] == 0.0 { 0.0 } else { self.step[i] * self.g[i + 1] } - k as f64 * self.g[i];
                (lhs - (self.f[i] - self.ef)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest disagreement between the forward and tail forms on `1..=k_max`.
    pub fn form_disagreement(&self) -> f64 {
        (1..=self.k_max() as usize).map(|k| (self.forward[k] - self.tail[k]).abs()).fold(0.0, f64::max)
    }

    /// Same solution for the operator multiplied by `1/c`, i.e. `g / c`.
    pub fn scaled(&self, c: f64) -> SteinSolution {
        let div = |v: &Vec<f64>| v.iter().map(|x| x / c).collect::<Vec<_>>();
        SteinSolution {
            g: div(&self.g),
            forward: div(&self.forward),
            tail: div(&self.tail),
            step: self.step.iter().map(|x| x * c).collect(),
            ..self.clone()
        }
    }
}

/// Uniform bound on `sup_k |Δg_f(k)|` over `f: Z+ -> [0, 1]`.
///
/// For `a, b >= 0` this is `1 ∧ 1/a`. For `b < 0` the k-wise bound
/// `min{1/k, 1/(a + b k)}` is at most `(1 - b)/a`, the reciprocal of the
/// mean, which gives `1/(np)` for the binomial.
pub fn delta_g_uniform_bound(spec: &PanjerPSD) -> Result<f64> {
    if !(spec.a > 0.0) {
        return Err(Error::InvalidBound(format!("needs a > 0, got a = {}", spec.a)));
    }
    if spec.b >= 0.0 {
        Ok(1f64.min(1.0 / spec.a))
    } else {
        Ok(1f64.min((1.0 - spec.b) / spec.a))
    }
}

struct Cumulative {
    table: PmfTable,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Cumulative {
    fn new(spec: &dyn PowerSeries, end: u64) -> Result<Self> {
        let table = deep_table(spec, end + 1)?;
        let len = table.masses.len();
        let mut lower = Vec::with_capacity(len);
        let mut acc = Neumaier::new();
        for p in &table.masses {
            acc.add(*p);
            lower.push(acc.value());
        }
        let mut upper = vec![0.0; len + 1];
        let mut acc = Neumaier::new();
        for j in (0..len).rev() {
            acc.add(table.masses[j]);
            upper[j] = acc.value();
        }
        Ok(Self { table, lower, upper })
    }

    /// `F(k) = P(Z <= k)`.
    fn cdf(&self, k: u64) -> f64 {
        self.lower.get(k as usize).copied().unwrap_or(1.0)
    }

    /// `F̄(k) = P(Z >= k)`.
    fn sf(&self, k: u64) -> f64 {
        self.upper.get(k as usize).copied().unwrap_or(0.0)
    }
}

/// `sup_{1<=k<=k_max}` of `F̄(k+1)/((k+1)p_{k+1}/p_k) + F(k-1)/k`, the exact
/// supremum of `|Δg_f(k)|` over `f: Z+ -> [0, 1]`, after checking
/// `k F(k)/F(k-1) >= (k+1)p_{k+1}/p_k >= k F̄(k+1)/F̄(k)` on the same range.
pub fn delta_g_exact_sup(spec: &dyn PowerSeries, k_max: u64) -> Result<f64> {
    let c = Cumulative::new(spec, k_max + 1)?;
    let tol = 1e-10;
    let mut best = 0.0f64;
    for k in 1..=k_max {
        if c.table.pmf(k) == 0.0 {
            break;
        }
        let r = spec.step_ratio(k);
        let kk = k as f64;
        let (fkm1, fk) = (c.cdf(k - 1), c.cdf(k));
        let (sk, sk1) = (c.sf(k), c.sf(k + 1));
        if kk * fk < r * fkm1 * (1.0 - tol) || r * sk < kk * sk1 * (1.0 - tol) {
            return Err(Error::LemmaConditionFailed { k });
        }
        let upper = if sk1 == 0.0 { 0.0 } else { sk1 / r };
        best = best.max(upper + fkm1 / kk);
    }
    Ok(best)
}

/// `sup_{1<=k<=k_max} F(k-1) F̄(k) / (k p_k)`, which is `sup |g_f(k)|` over
/// `f: Z+ -> [0, 1]` on that range.
///
/// The maximizing `f` is `1_{[0, k)}`; positive and negative parts of any
/// `f` contribute with opposite signs, so no doubling is needed.
pub fn g_sup_norm(spec: &dyn PowerSeries, k_max: u64) -> Result<f64> {
    let c = Cumulative::new(spec, k_max)?;
    let mut best = 0.0f64;
    for k in 1..=k_max {
        let pk = c.table.pmf(k);
        if pk == 0.0 {
            break;
        }
        best = best.max(c.cdf(k - 1) * c.sf(k) / (k as f64 * pk));
    }
    Ok(best)
}
