//! File formats and the `lpcoh` command-line driver for `lpcoh-core`.

pub mod cli;
pub mod config;
pub mod io;

use std::path::{Path, PathBuf};

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lpcoh_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("i/o error: {0}")]
    Stream(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit status: 2 for invalid input, 3 when a vertex budget is
    /// exceeded, 4 when the solver does not converge and 1 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(lpcoh_core::Error::BudgetExceeded { .. }) => 3,
            CliError::Core(lpcoh_core::Error::NotConverged { .. }) => 4,
            CliError::Core(_) | CliError::Format(_) | CliError::Csv(_) | CliError::Invalid(_) => 2,
            CliError::Io { .. } | CliError::Stream(_) => 1,
        }
    }
}
