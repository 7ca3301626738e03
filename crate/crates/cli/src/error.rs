use std::path::PathBuf;

use fmuod_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{0}")]
    Config(String),
    #[error("numeric degeneracy: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// Process exit code: 2 parse, 3 configuration, 4 numeric degeneracy,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Config(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::InvalidCurve { .. } | CoreError::ShapeMismatch(_) | CoreError::InvalidGrid(_) => 2,
                CoreError::InvalidConfig(_) | CoreError::InvalidDirection { .. } => 3,
                CoreError::DegenerateReference | CoreError::InsufficientData { .. } => 4,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
