use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or inconsistent configuration; exit code 2.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// A scenario assertion failed; exit code 1.
    #[error("assertion `{name}` failed: {detail}")]
    Assertion { name: String, detail: String },

    #[error(transparent)]
    Core(#[from] upwind_core::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}: {message}")]
    Input { path: String, message: String },
}

impl CliError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { key: key.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
