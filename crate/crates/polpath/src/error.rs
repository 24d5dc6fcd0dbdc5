use std::path::PathBuf;

use polpath_core::Error as CoreError;

/// Process exit status for a bad invocation.
pub const EXIT_USAGE: u8 = 2;
/// Process exit status for unreadable, malformed or inconsistent input.
pub const EXIT_DATA: u8 = 3;
/// Process exit status for a numerical failure.
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("selftest: {failed} of {total} checks failed")]
    SelftestFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Data(_) => EXIT_DATA,
            CliError::SelftestFailed { .. } => EXIT_NUMERICAL,
            CliError::Core(e) => match e {
                CoreError::InvalidConfig(_) | CoreError::RankOutOfRange(_) => EXIT_USAGE,
                CoreError::DegenerateStateVector
                | CoreError::Unphysical { .. }
                | CoreError::NonHermitian(_)
                | CoreError::MissingRun { .. }
                | CoreError::ZeroBudget { .. }
                | CoreError::DegenerateCountRecord { .. } => EXIT_DATA,
                CoreError::NonUnitary(_)
                | CoreError::DegenerateParameters
                | CoreError::OptimizerFailure { .. } => EXIT_NUMERICAL,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
