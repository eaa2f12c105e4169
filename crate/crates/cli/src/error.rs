use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    BadInput(String),

    #[error("numerical failure: {0}")]
    Numerical(lowsnr::Error),

    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 1,
            CliError::BadInput(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }
}

impl From<lowsnr::Error> for CliError {
    fn from(e: lowsnr::Error) -> Self {
        match e {
            lowsnr::Error::InvalidInput(msg) => CliError::BadInput(msg),
            other => CliError::Numerical(other),
        }
    }
}

pub fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadInput(msg.into())
}
