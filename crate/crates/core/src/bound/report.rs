use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Itemized bound. Every variant obeys
/// `total = delta_g_factor * (term_quadratic + term_linear + term_tau)`;
/// the `min` variant additionally carries both operands and copies the
/// terms of the smaller one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub variant: String,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub delta_g_factor: f64,
    pub term_quadratic: f64,
    pub term_linear: f64,
    pub term_tau: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub smoothing: Vec<f64>,
    pub total: f64,
    /// Certified allowance for truncated expectations.
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operands: Vec<BoundReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_terms: Option<Vec<RunsMomentTerms>>,
    /// Brown–Xia value for the same cell, when one applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<f64>,
}

/// Per-index moment functions behind a runs bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsMomentTerms {
    pub i: usize,
    pub mean: f64,
    pub bar1: f64,
    pub bar2: f64,
    pub bar3: f64,
}

/// Report for the runs theorems; same shape as any other bound.
pub type RunsBoundReport = BoundReport;

impl BoundReport {
    pub(crate) fn assemble(variant: &str, n: usize, a: f64, b: f64, delta: f64, parts: [f64; 3]) -> Self {
        let [q, l, t] = parts;
        Self {
            variant: variant.to_string(),
            n,
            a,
            b,
            delta_g_factor: delta,
            term_quadratic: q,
            term_linear: l,
            term_tau: t,
            smoothing: Vec::new(),
            total: delta * (q + l + t),
            slack: 0.0,
            operands: Vec::new(),
            c_constant: None,
            moment_terms: None,
            comparison: None,
        }
    }

    /// Total rebuilt from the itemized parts.
    pub fn recompute(&self) -> f64 {
        self.delta_g_factor * (self.term_quadratic + self.term_linear + self.term_tau)
    }

    pub fn is_consistent(&self, tol: f64) -> bool {
        let parts_ok = (self.recompute() - self.total).abs() <= tol * self.total.abs().max(1.0);
        let nonneg = [self.delta_g_factor, self.term_quadratic, self.term_linear, self.term_tau, self.total]
            .iter()
            .all(|x| *x >= 0.0);
        let operands_ok = self.operands.is_empty()
            || (self.operands.iter().map(|o| o.total).fold(f64::INFINITY, f64::min) - self.total).abs()
                <= tol * self.total.abs().max(1.0);
        parts_ok && nonneg && operands_ok
    }

    /// Upper end of the certified interval.
    pub fn upper(&self) -> f64 {
        self.total + self.slack
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn csv_header() -> &'static str {
        "variant,n,a,b,delta_g,quadratic,linear,tau,total,slack"
    }

    pub fn csv_row(&self, precision: usize) -> String {
        let p = precision;
        format!(
            "{},{},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$}",
            self.variant,
            self.n,
            self.a,
            self.b,
            self.delta_g_factor,
            self.term_quadratic,
            self.term_linear,
            self.term_tau,
            self.total,
            self.slack
        )
    }
}
