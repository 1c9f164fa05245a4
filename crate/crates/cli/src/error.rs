use std::path::{Path, PathBuf};
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Rejected configuration or input, reported with the offending field.
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    /// Malformed input file.
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    /// Failure while sampling or computing results.
    #[error("{0}")]
    Runtime(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Maps a library error onto the CLI categories; `path` names the config
    /// section that produced it.
    pub fn from_core(path: &str, err: privpost::Error) -> Self {
        use privpost::Error as E;
        match err.root() {
            E::Numeric(_) => CliError::Runtime(err.to_string()),
            E::Parameter { name, reason } => CliError::config(format!("{path}.{name}"), reason.clone()),
            _ => CliError::config(path, err.to_string()),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config { .. } | CliError::Parse { .. } => 2,
            CliError::Runtime(_) => 3,
            CliError::Io { .. } => 4,
        })
    }
}

pub type CliResult<T> = Result<T, CliError>;
