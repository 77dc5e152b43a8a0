use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {value} lies outside the domain {domain}")]
    Domain { value: f64, domain: String },

    #[error("derivative of a steep kernel requested at boundary point {0}")]
    BoundaryDerivative(f64),

    #[error("point is outside the prox-domain (coordinate {index} = {value})")]
    ProxDomain { index: usize, value: f64 },

    #[error("analytic Legendre exponent unavailable for kernel `{0}`")]
    UnsupportedKernel(String),

    #[error("point is infeasible: {0}")]
    Infeasible(String),

    #[error("point is not a solution: slack decomposition residual {residual:e}")]
    NotASolution { residual: f64 },

    #[error("separation certificate requested with I equal to the full active set")]
    Degenerate,

    #[error("active set has {0} coordinates; exhaustive enumeration is limited to 12")]
    CombinatorialLimit(usize),

    #[error("prox-mapping undefined: {0}")]
    ProxUndefined(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("the dual Newton engine requires a steep kernel, got `{0}`")]
    SteepnessRequired(String),

    #[error("unsupported kernel/domain pairing: {0}")]
    UnsupportedPairing(String),

    #[error("step-size conditions violated: {0}")]
    InvalidStep(String),

    #[error("regularizer is not decomposable: {0}")]
    NotDecomposable(String),

    #[error("need at least {needed} usable samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("sequence left the admissible interval at step {step} (value {value:e})")]
    SequenceDivergence { step: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
