use std::fmt;
use std::sync::{Arc, OnceLock};

use statrs::function::factorial::ln_factorial;

use super::{PowerSeries, MAX_TABLE_LEN};
use crate::error::{Error, Result};
use crate::numeric::neumaier_sum;
use crate::pmf::PmfTable;

type LogCoeffFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Coefficients {
    Finite(Vec<f64>),
    Log(LogCoeffFn),
}

/// Power-series law given directly by its series parameter `θ` and
/// coefficient function `a_k`.
///
/// For an infinite coefficient function the tail certificate assumes the
/// term ratio `θ a_{k+1}/a_k` is non-increasing once it drops below one,
/// which holds for the log-concave families used in practice.
#[derive(Clone)]
pub struct PsdSpec {
    theta: f64,
    coeff: Coefficients,
    norm: Arc<OnceLock<Result<f64>>>,
}

impl fmt::Debug for PsdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeff = match &self.coeff {
            Coefficients::Finite(c) => format!("{c:?}"),
            Coefficients::Log(_) => "<fn>".to_string(),
        };
        f.debug_struct("PsdSpec").field("theta", &self.theta).field("coeff", &coeff).finish()
    }
}

const WINDOW: usize = 8;

impl PsdSpec {
    /// Finite coefficient list `a_0, ..., a_n`.
    pub fn finite(theta: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidFamily(format!("theta must be positive, got {theta}")));
        }
        if coeffs.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidFamily("coefficients must be finite and non-negative".into()));
        }
        if !coeffs.iter().any(|c| *c > 0.0) {
            return Err(Error::InvalidFamily("at least one coefficient must be positive".into()));
        }
        Ok(Self { theta, coeff: Coefficients::Finite(coeffs), norm: Arc::default() })
    }

    /// Coefficients given as `k -> ln a_k` (`-inf` for a zero coefficient).
    pub fn from_log_coeff<F>(theta: f64, ln_coeff: F) -> Result<Self>
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidFamily(format!("theta must be positive, got {theta}")));
        }
        let spec = Self { theta, coeff: Coefficients::Log(Arc::new(ln_coeff)), norm: Arc::default() };
        spec.ln_norm()?;
        Ok(spec)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn ln_coeff(&self, k: u64) -> f64 {
        match &self.coeff {
            Coefficients::Finite(c) => match c.get(k as usize) {
                Some(&x) if x > 0.0 => x.ln(),
                _ => f64::NEG_INFINITY,
            },
            Coefficients::Log(f) => f(k),
        }
    }

    pub fn coeff(&self, k: u64) -> f64 {
        self.ln_coeff(k).exp()
    }

    fn ln_term(&self, k: u64) -> f64 {
        let lc = self.ln_coeff(k);
        if lc == f64::NEG_INFINITY {
            lc
        } else {
            lc + k as f64 * self.theta.ln()
        }
    }

    /// `ln γ(θ)`, computed once.
    pub fn ln_norm(&self) -> Result<f64> {
        self.norm
            .get_or_init(|| {
                let (ln_terms, _) = self.ln_terms(0, super::TABLE_TAIL_EPS)?;
                let shift = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(shift + neumaier_sum(ln_terms.iter().map(|t| (t - shift).exp())).ln())
            })
            .clone()
    }

    /// `γ(θ) = Σ a_k θ^k` (may overflow to infinity; see [`Self::ln_norm`]).
    pub fn norm(&self) -> Result<f64> {
        Ok(self.ln_norm()?.exp())
    }

    pub fn pmf(&self, k: u64) -> Result<f64> {
        Ok((self.ln_term(k) - self.ln_norm()?).exp())
    }

    /// Log terms `ln(a_k θ^k)` up to a certified tail, and the tail bound
    /// relative to the largest term.
    fn ln_terms(&self, min_len: usize, tail_eps: f64) -> Result<(Vec<f64>, f64)> {
        if let Coefficients::Finite(c) = &self.coeff {
            let n = c.len().max(min_len.min(c.len()));
            return Ok(((0..n as u64).map(|k| self.ln_term(k)).collect(), 0.0));
        }
        let mut out: Vec<f64> = Vec::new();
        let mut peak = f64::NEG_INFINITY;
        let mut zero_run = 0usize;
        loop {
            let k = out.len() as u64;
            let lt = self.ln_term(k);
            if lt.is_nan() || lt == f64::INFINITY {
                return Err(Error::NonNormalizable(format!("coefficient at k = {k} is not finite")));
            }
            if lt > 1e5 {
                return Err(Error::NonNormalizable("terms grow without bound".into()));
            }
            out.push(lt);
            peak = peak.max(lt);
            zero_run = if lt == f64::NEG_INFINITY { zero_run + 1 } else { 0 };
            if out.len() >= min_len.max(WINDOW + 1) {
                if zero_run >= 64 {
                    // Treated as finite support.
                    return Ok((out, 0.0));
                }
                if let Some(rho) = self.tail_ratio_bound(k) {
                    if rho < 1.0 {
                        let tail = (lt - peak).exp() * rho / (1.0 - rho);
                        if tail <= tail_eps {
                            return Ok((out, tail));
                        }
                    }
                }
            }
            if out.len() > MAX_TABLE_LEN {
                return Err(Error::NonNormalizable(format!("no certified tail after {MAX_TABLE_LEN} terms")));
            }
        }
    }

    fn term_ratio(&self, k: u64) -> f64 {
        let (l0, l1) = (self.ln_term(k), self.ln_term(k + 1));
        if l0 == f64::NEG_INFINITY {
            return 0.0;
        }
        (l1 - l0).exp()
    }
}

impl PowerSeries for PsdSpec {
    fn step_ratio(&self, k: u64) -> f64 {
        let (lk, lk1) = (self.ln_coeff(k), self.ln_coeff(k + 1));
        if lk == f64::NEG_INFINITY || lk1 == f64::NEG_INFINITY {
            return 0.0;
        }
        self.theta * (k + 1) as f64 * (lk1 - lk).exp()
    }

    fn support_max(&self) -> Option<u64> {
        match &self.coeff {
            Coefficients::Finite(c) => c.iter().rposition(|x| *x > 0.0).map(|i| i as u64),
            Coefficients::Log(_) => None,
        }
    }

    fn table_with(&self, min_len: usize, tail_eps: f64) -> Result<PmfTable> {
        let (ln_terms, _) = self.ln_terms(min_len, tail_eps)?;
        let shift = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ln_terms.iter().map(|t| (t - shift).exp()).collect();
        let total = neumaier_sum(w.iter().copied());
        let last_k = (w.len() - 1) as u64;
        let tail = match self.tail_ratio_bound(last_k) {
            Some(rho) if rho < 1.0 => w[w.len() - 1] * rho / (1.0 - rho) / total,
            _ => 0.0,
        };
        PmfTable::new(0, w.iter().map(|x| x / total).collect(), tail)
    }

    fn tail_ratio_bound(&self, k: u64) -> Option<f64> {
        match &self.coeff {
            Coefficients::Finite(c) => {
                if k as usize + 1 >= c.len() {
                    Some(0.0)
                } else {
                    None
                }
            }
            Coefficients::Log(_) => {
                // Ratio must be below one and non-increasing over a window.
                let lo = k.saturating_sub(WINDOW as u64);
                let ratios: Vec<f64> = (lo..=k).map(|j| self.term_ratio(j)).collect();
                let nonincreasing = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
                let r = *ratios.last()?;
                (nonincreasing && r < 1.0).then_some(r)
            }
        }
    }
}

/// Discrete Gibbs measure `P(U = k) ∝ e^{V(k)} w^k / k!` as a power-series
/// family with `θ = w` and `a_k = e^{V(k)}/k!`.
pub fn dgm_to_psd<V>(potential: V, w: f64) -> Result<PsdSpec>
where
    V: Fn(u64) -> f64 + Send + Sync + 'static,
{
    PsdSpec::from_log_coeff(w, move |k| potential(k) - ln_factorial(k))
}
