//! Command implementations behind the `dirrec` binary.
//!
//! Exit codes: 0 success, 1 property violation, 2 I/O failure, 3 invalid
//! input (config, CSV, arguments).

pub mod commands;
pub mod manifest;
pub mod svg;
pub mod verify;

use std::io;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DR_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Violation(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl From<dirrec::Error> for CliError {
    fn from(e: dirrec::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Parses `DR_THREADS`; `None` when unset or empty.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}
