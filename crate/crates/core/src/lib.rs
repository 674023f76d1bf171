//! Discretized magnetic Schrödinger operators, their quasimodes and spectral gaps.

// `!(x > 0.0)` style checks must also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod field;
pub mod gaps;
pub mod gauge;
pub mod grid;
pub mod model;
pub mod operator;
pub mod quasimode;
pub mod sparse;
pub mod stats;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
