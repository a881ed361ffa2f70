// Negated comparisons are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field3d;
pub mod harmonic;
pub mod monotone;
pub mod numerics;
pub mod radial;
pub mod report;
pub mod schwarzschild;
pub mod suites;

pub use error::{Error, Result};
