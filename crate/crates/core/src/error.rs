use std::path::PathBuf;

/// Errors produced anywhere in the summarization stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("conditional distribution undefined: bin {bin} was never observed")]
    UndefinedConditional { bin: usize },

    #[error("unsupported shape {0:?}: only 2D fields are supported here")]
    UnsupportedShape(Vec<usize>),

    #[error("input contains no timesteps")]
    EmptyInput,

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("schedule conflict: {0}")]
    ScheduleConflict(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn decode(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Decode {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code for this error class. Success is 0.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidArgument(_) => 2,
            Error::UndefinedConditional { .. } => 3,
            Error::UnsupportedShape(_) => 4,
            Error::EmptyInput => 5,
            Error::InvalidSequence(_) => 6,
            Error::ScheduleConflict(_) => 7,
            Error::Io { .. } | Error::Decode { .. } => 8,
            Error::Internal(_) => 9,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
