//! Compensated floating-point accumulation.
//!
//! [`Neumaier`] is a running sum with a single correction term; [`DoubleDouble`]
//! carries an unevaluated `hi + lo` pair (about 32 significant digits) and is
//! used where a partial sum cancels against a quantity of order one, as in the
//! forward form of the Stein-equation solution.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Neumaier (improved Kahan–Babuška) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of `f64`.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<Neumaier>().value()
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `self / d` rounded to double-double accuracy, then to `f64`.
    pub fn div_f64(self, d: f64) -> f64 {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = ((self.hi - p) - e + self.lo) / d;
        q1 + r
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    /// Full double-double quotient.
    pub fn div(self, d: DoubleDouble) -> DoubleDouble {
        let q1 = self.hi / d.hi;
        let r = self - d.mul_f64(q1);
        let q2 = r.hi / d.hi;
        let r = r - d.mul_f64(q2);
        let q3 = r.hi / d.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        DoubleDouble { hi, lo } + q3
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, rhs: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        DoubleDouble { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, rhs: f64) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, rhs);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        DoubleDouble { hi, lo }
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, rhs: DoubleDouble) {
        *self = *self + rhs;
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    fn neg(self) -> DoubleDouble {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    fn sub(self, rhs: DoubleDouble) -> DoubleDouble {
        self + (-rhs)
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, rhs: f64) -> DoubleDouble {
        self.mul_f64(rhs)
    }
}

/// Relative-or-absolute closeness used throughout the test suites.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs().max(b.abs()))
}
