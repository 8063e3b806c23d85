use std::path::PathBuf;

use hce_core::{BenchError, Error as CoreError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Infeasible(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Infeasible(_) => 4,
            CliError::Core { source, .. } => match source {
                CoreError::Bench(
                    BenchError::ProbabilityExceedsOne { .. } | BenchError::InfeasibleBudget { .. },
                ) => 4,
                _ => 2,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

/// Attaches a context string to core errors.
pub trait CoreContext<T> {
    fn context(self, context: impl Into<String>) -> Result<T, CliError>;
}

impl<T, E: Into<CoreError>> CoreContext<T> for Result<T, E> {
    fn context(self, context: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|e| CliError::Core {
            context: context.into(),
            source: e.into(),
        })
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
