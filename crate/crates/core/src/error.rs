use thiserror::Error;

/// Errors raised by constructors, samplers and statistics kernels.
#[derive(Debug, Error)]
pub enum DqcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e}, max {max_eig:.3e})")]
    NotPsd { min_eig: f64, max_eig: f64 },

    #[error("map is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("map is not completely positive (min Choi eigenvalue {min_eig:.3e})")]
    NotCompletelyPositive { min_eig: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("matrix exponential overflow (1-norm {norm:.3e})")]
    ExpmOverflow { norm: f64 },

    #[error("root tracing failed along ray at angle {angle:.6}")]
    RootTracing { angle: f64 },

    #[error("symmetry commutation failure (residual {residual:.3e})")]
    Commutation { residual: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("integration diverged: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DqcError>;
