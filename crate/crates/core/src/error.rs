use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {0})")]
    NotPositiveDefinite(usize),

    #[error("matrix has a negative eigenvalue {0:e} beyond rounding level")]
    NotPositiveSemidefinite(f64),

    #[error("pole must be finite and negative, got {0}")]
    InvalidPole(f64),

    #[error("conjugate gradients stopped at relative residual {residual:e} after {iterations} iterations")]
    CgNoConvergence { residual: f64, iterations: usize },

    #[error("Krylov method stopped after {iterations} iterations with error statistic {statistic:e} above tolerance {tolerance:e}")]
    KrylovNoConvergence {
        iterations: usize,
        statistic: f64,
        tolerance: f64,
    },

    #[error("estimator needs {needed} vectors, above the limit of {limit}")]
    BudgetExceeded { needed: usize, limit: usize },

    #[error("eigensolver did not converge")]
    EigNoConvergence,

    #[error("dense oracle is limited to n <= {limit}, got n = {n}")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
