use serde::Serialize;

use super::two_runs::{brown_xia_bound, nb_bound_closed_form};
use crate::error::Result;

/// `(n, p, closed form, Brown–Xia)` as printed, six decimals.
pub const TABLE1_CELLS: [(usize, f64, &str, &str); 18] = [
    (20, 0.05, "0.344694", "0.398900"),
    (20, 0.07, "0.506847", "0.576571"),
    (20, 0.09, "0.683285", "0.765878"),
    (25, 0.05, "0.303992", "0.354924"),
    (25, 0.07, "0.446997", "0.513008"),
    (25, 0.09, "0.602601", "0.681445"),
    (30, 0.05, "0.263265", "0.322880"),
    (30, 0.07, "0.387111", "0.466692"),
    (30, 0.09, "0.521867", "0.619922"),
    (35, 0.11, "0.618205", "0.723476"),
    (35, 0.13, "0.763728", "0.884669"),
    (35, 0.15, "0.919907", "1.057010"),
    (40, 0.11, "0.561012", "0.675509"),
    (40, 0.13, "0.693072", "0.826015"),
    (40, 0.15, "0.834802", "0.986930"),
    (50, 0.11, "0.493157", "0.602650"),
    (50, 0.13, "0.609244", "0.736923"),
    (50, 0.15, "0.733832", "0.880482"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Cell {
    pub n: usize,
    pub p: f64,
    pub closed_form: f64,
    pub brown_xia: f64,
}

impl Table1Cell {
    pub fn compute(n: usize, p: f64) -> Result<Self> {
        Ok(Self { n, p, closed_form: nb_bound_closed_form(n, p)?, brown_xia: brown_xia_bound(n, p)? })
    }
}

/// Every printed cell, in print order.
pub fn table1() -> Result<Vec<Table1Cell>> {
    TABLE1_CELLS.iter().map(|&(n, p, _, _)| Table1Cell::compute(n, p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Mismatch {
    pub n: usize,
    pub p: f64,
    pub column: &'static str,
    pub expected: &'static str,
    pub got: String,
}

/// Compares six-decimal renderings against the printed strings.
pub fn table1_check(cells: &[Table1Cell]) -> Vec<Table1Mismatch> {
    let mut out = Vec::new();
    for (cell, &(n, p, closed, bx)) in cells.iter().zip(TABLE1_CELLS.iter()) {
        for (column, expected, value) in [("closed-form", closed, cell.closed_form), ("brown-xia", bx, cell.brown_xia)] {
            let got = format!("{value:.6}");
            if got != expected || cell.n != n || cell.p != p {
                out.push(Table1Mismatch { n, p, column, expected, got });
            }
        }
    }
    if cells.len() != TABLE1_CELLS.len() {
        out.push(Table1Mismatch { n: 0, p: 0.0, column: "rows", expected: "18", got: cells.len().to_string() });
    }
    out
}
