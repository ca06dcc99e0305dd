// Negated float comparisons deliberately send NaN down the rejection path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the tensor formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod chart;
pub mod check;
pub mod contact;
pub mod error;
pub mod expr;
pub mod forms;
pub mod models;
pub mod pointwise;
pub mod random;
pub mod report;
pub mod symplectization;
pub mod toric;

pub use error::{Error, Result};
