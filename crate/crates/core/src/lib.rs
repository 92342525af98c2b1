//! Power-series approximation of sums of 1-dependent random variables by
//! Stein's method, with exact oracles for runs statistics.

pub mod bound;
pub mod dependent;
pub mod enumerate;
pub mod error;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod pmf;
pub mod psd;
pub mod runs;
pub mod verify;

pub use error::{Error, Result};
pub use pmf::PmfTable;
