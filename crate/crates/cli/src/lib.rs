//! Batch driver: experiment configs in, CSV/JSON artifacts and a manifest out.

// `!(x > 0.0)` style checks must also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod plot;
pub mod run;
