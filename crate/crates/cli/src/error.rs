use serde::Serialize;
use skewsim_core::SkewError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CliError {
    #[error("invalid configuration: {message}")]
    Config {
        message: String,
        offending_keys: Vec<String>,
    },
    #[error("{context}: {message}")]
    Numerical { context: String, message: String },
    #[error("i/o: {message}")]
    Io { message: String },
    #[error("malformed csv: {message}")]
    Csv { message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            message: message.into(),
            offending_keys: Vec::new(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError::Io {
            message: message.into(),
        }
    }

    pub fn csv(message: impl Into<String>) -> Self {
        CliError::Csv {
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } | CliError::Csv { .. } => 4,
        }
    }
}

/// Attaches the failing step to an error from the core library.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, SkewError> {
    fn context(self, what: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Numerical {
            context: what.to_owned(),
            message: e.to_string(),
        })
    }
}
