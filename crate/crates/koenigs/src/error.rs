use koenigs_core::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) => match e {
                Error::Domain(_)
                | Error::BranchPoint
                | Error::Range(_)
                | Error::Argument(_)
                | Error::CenterMismatch => exit::USAGE,
                Error::NonConvergent(_) | Error::Numerical(_) | Error::Solver { .. } | Error::Statistical(_) => {
                    exit::NUMERICAL
                }
            },
            // A bad --out path is a usage problem.
            Self::Usage(_) | Self::Io(_) => exit::USAGE,
            Self::Csv(_) | Self::Json(_) => exit::NUMERICAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
