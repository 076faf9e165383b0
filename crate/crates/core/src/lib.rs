//! Equality-constrained optimization by regularization continuation.

// Negated comparisons are deliberate: they treat NaN as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod float_serde;
pub mod gcnmtr;
pub mod linalg;
pub mod model;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use model::{GcnmtrConfig, Problem, RcmConfig, RunRecord, Status};
pub use solver::{solve, solve_with, SolveOptions, SolveOutput};
