use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("scenario `{id}`: {source}")]
    Scenario { id: String, source: Box<CliError> },
    #[error(transparent)]
    Module(#[from] fhkit::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn in_scenario(self, id: &str) -> Self {
        CliError::Scenario { id: id.to_string(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
