use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{PowerSeries, MAX_TABLE_LEN};
use crate::error::{Error, Result};
use crate::numeric::neumaier_sum;
use crate::pmf::PmfTable;

/// Member of the Panjer class: `(k+1) p_{k+1} = (a + b k) p_k`.
///
/// `p_0` is not stored; it is whatever normalizes the recursion. Families with
/// `b < 0` must end their support where `a + b k` reaches zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanjerPSD {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub max_support: Option<u64>,
}

impl PanjerPSD {
    pub fn new(a: f64, b: f64, max_support: Option<u64>) -> Result<Self> {
        let mut spec = Self { a, b, max_support };
        spec.max_support = spec.resolved_support()?;
        Ok(spec)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidFamily(format!("Poisson rate must be positive, got {lambda}")));
        }
        Self::new(lambda, 0.0, None)
    }

    /// `NB(alpha, p)` counting failures before the `alpha`-th success, so that
    /// `a = alpha (1 - p)` and `b = 1 - p`.
    pub fn negative_binomial(alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidFamily(format!("NB needs alpha > 0 and p in (0, 1], got ({alpha}, {p})")));
        }
        Self::new(alpha * (1.0 - p), 1.0 - p, None)
    }

    /// Geometric law with mass `(1 - q) q^k`.
    pub fn geometric(q: f64) -> Result<Self> {
        Self::negative_binomial(1.0, 1.0 - q)
    }

    /// Binomial `Bi(n, p)` in Panjer form: `a = np/q`, `b = -p/q`.
    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) || n == 0 {
            return Err(Error::InvalidFamily(format!("binomial needs n >= 1 and p in (0, 1), got ({n}, {p})")));
        }
        let q = 1.0 - p;
        Self::new(n as f64 * p / q, -p / q, Some(n))
    }

    /// Whether the family lies in the class with `a, b >= 0`.
    pub fn in_class_p2(&self) -> bool {
        self.a >= 0.0 && self.b >= 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let resolved = self.resolved_support()?;
        if self.max_support.is_some() && resolved != self.max_support {
            return Err(Error::InvalidFamily("max_support inconsistent with (a, b)".into()));
        }
        Ok(())
    }

    fn resolved_support(&self) -> Result<Option<u64>> {
        let (a, b) = (self.a, self.b);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidFamily("a and b must be finite".into()));
        }
        if a < 0.0 {
            return Err(Error::InvalidFamily(format!("a = {a} < 0 makes p_1 negative")));
        }
        if b >= 1.0 {
            return Err(Error::NonNormalizable(format!("recursion ratio tends to b = {b} >= 1")));
        }
        if a == 0.0 {
            return Ok(Some(0));
        }
        if let Some(n) = self.max_support {
            for k in 0..n {
                if a + b * k as f64 <= 0.0 {
                    return Err(Error::InvalidFamily(format!("a + b k <= 0 at k = {k} inside the claimed support")));
                }
            }
            return Ok(Some(n));
        }
        if b < 0.0 {
            let root = -a / b;
            let n = root.round();
            if (root - n).abs() <= 1e-9 * root.max(1.0) && n >= 1.0 {
                return Ok(Some(n as u64));
            }
            return Err(Error::InvalidFamily(format!(
                "a + b k changes sign at non-integer k = {root}, producing negative mass"
            )));
        }
        Ok(None)
    }

    /// Probability of zero, fixed by normalization.
    pub fn p0(&self) -> Result<f64> {
        Ok(self.table(1)?.pmf(0))
    }

    pub fn mean_var(&self) -> Result<(f64, f64)> {
        psd_mean_var(self.a, self.b)
    }

    fn ratio(&self, k: u64) -> f64 {
        (self.a + self.b * k as f64) / (k + 1) as f64
    }

    /// Unnormalized weights `w_0 = 1, w_{k+1} = w_k (a + b k)/(k + 1)`,
    /// rescaled on the fly to avoid overflow, plus a certified bound on the
    /// weight beyond the last entry.
    fn weights(&self, min_len: usize, tail_eps: f64) -> Result<(Vec<f64>, f64)> {
        let support = self.resolved_support()?;
        let mut w = vec![1.0f64];
        let mut running = 1.0f64;
        loop {
            let k = (w.len() - 1) as u64;
            if support == Some(k) {
                return Ok((w, 0.0));
            }
            let r = self.ratio(k);
            if r < 0.0 {
                return Err(Error::InvalidFamily(format!("negative mass at k = {}", k + 1)));
            }
            let next = w[w.len() - 1] * r;
            w.push(next);
            running += next;
            if next > 1e280 {
                for x in w.iter_mut() {
                    *x *= 1e-280;
                }
                running *= 1e-280;
            }
            let last = w[w.len() - 1];
            if w.len() >= min_len.max(2) {
                if let Some(rho) = self.tail_ratio_bound(k + 1) {
                    if rho < 1.0 {
                        let tail = last * rho / (1.0 - rho);
                        if tail <= tail_eps * running || (last == 0.0 && support.is_none()) {
                            return Ok((w, tail));
                        }
                    }
                }
            }
            if w.len() > MAX_TABLE_LEN {
                return Err(Error::NonNormalizable(format!("no certified tail after {MAX_TABLE_LEN} terms")));
            }
        }
    }
}

impl PowerSeries for PanjerPSD {
    fn step_ratio(&self, k: u64) -> f64 {
        match self.max_support {
            Some(n) if k >= n => 0.0,
            _ => self.a + self.b * k as f64,
        }
    }

    fn support_max(&self) -> Option<u64> {
        self.max_support
    }

    fn table_with(&self, min_len: usize, tail_eps: f64) -> Result<PmfTable> {
        let (w, tail) = self.weights(min_len, tail_eps)?;
        let total = neumaier_sum(w.iter().copied());
        let masses: Vec<f64> = w.iter().map(|x| x / total).collect();
        // A few ulps of the normalization cover rounding in the tail estimate.
        let tail_bound = if tail > 0.0 { tail / total + 4.0 * f64::EPSILON * tail / total } else { 0.0 };
        PmfTable::new(0, masses, tail_bound)
    }

    fn tail_ratio_bound(&self, k: u64) -> Option<f64> {
        if let Some(n) = self.max_support {
            if k >= n {
                return Some(0.0);
            }
        }
        // (a + b j)/(j + 1) is monotone in j with limit b.
        let rho = if self.b >= self.a { self.b } else { self.ratio(k) };
        Some(rho.max(0.0))
    }
}

/// Mean `a/(1-b)` and variance `a/(1-b)^2` of a Panjer family.
pub fn psd_mean_var(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(b < 1.0) {
        return Err(Error::UndefinedMoments(format!("b = {b} >= 1")));
    }
    let one_minus_b = 1.0 - b;
    Ok((a / one_minus_b, a / (one_minus_b * one_minus_b)))
}

/// Mass table on `0..=k_max` with a certified bound on the mass beyond.
pub fn pmf_panjer(spec: &PanjerPSD, k_max: u64) -> Result<PmfTable> {
    let full = spec.table((k_max + 1) as usize)?;
    let keep = full.masses.len().min(k_max as usize + 1);
    let dropped = neumaier_sum(full.masses[keep..].iter().copied());
    PmfTable::new(0, full.masses[..keep].to_vec(), full.tail_mass_bound + dropped)
}

/// Exact rational masses for a finite-support family. The `f64` parameters
/// are converted exactly, so `a = 4, b = -1` yields `(1, 4, 6, 4, 1)/16`.
pub fn pmf_panjer_exact(spec: &PanjerPSD) -> Result<Vec<BigRational>> {
    let n = spec
        .resolved_support()?
        .ok_or_else(|| Error::InvalidArgument("exact mode needs a finite support".into()))?;
    let a = BigRational::from_f64(spec.a).ok_or_else(|| Error::InvalidFamily("a not representable".into()))?;
    let b = BigRational::from_f64(spec.b).ok_or_else(|| Error::InvalidFamily("b not representable".into()))?;
    let mut w = vec![BigRational::one()];
    for k in 0..n {
        let kk = BigRational::from_integer(BigInt::from(k));
        let r = (&a + &b * &kk) / BigRational::from_integer(BigInt::from(k + 1));
        if r.is_negative() {
            return Err(Error::InvalidFamily(format!("negative mass at k = {}", k + 1)));
        }
        let next = &w[w.len() - 1] * r;
        w.push(next);
    }
    let total = w.iter().fold(BigRational::zero(), |acc, x| acc + x);
    Ok(w.into_iter().map(|x| x / &total).collect())
}
