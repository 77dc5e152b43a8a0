//! Scalar Bregman kernels and the decomposable regularizers they induce.

mod regularizer;
mod scalar;

pub use regularizer::{Regularizer, GRID_LEVELS, RANDOM_DIRECTIONS};
pub use scalar::{kernel_eval, BoundaryClass, BregmanKernel, CustomKernel};
