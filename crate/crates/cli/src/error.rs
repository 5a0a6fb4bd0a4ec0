use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: cannot parse {text:?} as a number", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("{}:{line}: inter-event time {value} must be finite and nonnegative", path.display())]
    InvalidValue {
        path: PathBuf,
        line: usize,
        value: f64,
    },
    #[error("{}: no values", path.display())]
    EmptyFile { path: PathBuf },
    #[error("config file {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("writing output: {0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] shortage_core::Error),
    #[error("{0} table cell(s) hit a numeric failure")]
    CellFailures(usize),
}

impl CliError {
    /// Process exit status: 3 for numeric failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(shortage_core::Error::NumericFailure { .. })
            | CliError::CellFailures(_) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
