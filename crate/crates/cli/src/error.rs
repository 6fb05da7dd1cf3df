use dqc_core::DqcError;
use thiserror::Error;

/// Failures of a CLI invocation, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{origin}:{line}:{column}: {message}")]
    Config { origin: String, line: usize, column: usize, message: String },

    #[error("{origin}: invalid value for `{key}`: {reason}")]
    Invalid { origin: String, key: String, reason: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] DqcError),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 4 for invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config { .. } | Self::Invalid { .. } => 2,
            Self::Invariant(_) => 4,
            Self::Io { .. } => 1,
            Self::Core(e) => match e {
                DqcError::InvalidParameter { .. } | DqcError::Parse { .. } => 2,
                DqcError::NotHermitian { .. }
                | DqcError::NotPsd { .. }
                | DqcError::NotTracePreserving { .. }
                | DqcError::NotCompletelyPositive { .. }
                | DqcError::Commutation { .. }
                | DqcError::DimensionMismatch { .. } => 4,
                DqcError::Io(_) | DqcError::Json(_) => 1,
                _ => 3,
            },
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io { context: context.into(), source }
    }

    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Self::Invalid { origin: "config".into(), key: key.into(), reason: reason.into() }
    }
}
