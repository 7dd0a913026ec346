use std::path::PathBuf;

use duality_core::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing report: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } => 3,
            CliError::Io { .. } | CliError::Csv(_) => 4,
            CliError::Sim(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
