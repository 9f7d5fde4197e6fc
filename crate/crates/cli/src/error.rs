use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {}{msg}", path.display(), line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] kerneldist::Error),
}

impl CliError {
    /// Process exit status: 2 for unreadable or malformed input, 3 for
    /// invalid parameters, 4 for numerical failures, 5 for budget guards.
    pub fn exit_code(&self) -> i32 {
        use kerneldist::Error as E;
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Usage(_) => 3,
            CliError::Core(e) => match e {
                E::NumericalInstability { .. } | E::Overflow(_) => 4,
                E::BudgetExceeded { .. } | E::FeatureDimensionTooLarge { .. } => 5,
                _ => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
