//! Bregman proximal methods for variational inequalities on polyhedral
//! domains, with tools for measuring and predicting their local rates.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod domains;
pub mod error;
pub mod field;
pub mod harness;
pub mod iterate;
pub mod kernels;
pub(crate) mod lp;
pub mod prox;
pub mod solver;

pub use domains::{classify_solution, separation_certificate, Certificate, Domain, SolutionProfile};
pub use error::{Error, Result};
pub use field::{AffineField, FnField, VectorField};
pub use iterate::Iterate;
pub use kernels::{BoundaryClass, BregmanKernel, Regularizer};
pub use solver::{run, MethodConfig, Preset, Problem, StepSchedule, Trajectory};
