use std::process::ExitCode;

use eby_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or out-of-range input. Exit code 2.
    #[error("bad input: {0}")]
    BadInput(String),
    /// Input is well-formed but violates a procedure's contract. Exit code 3.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Exit code 4.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::BadInput(_) => 2,
            CliError::Contract(_) => 3,
            CliError::Internal(_) => 4,
        })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotAnEci(i) => CliError::Contract(CoreError::NotAnEci(i + 1).to_string()),
            CoreError::NotInverse { .. } | CoreError::WeightSumExceeded { .. } => {
                CliError::Contract(e.to_string())
            }
            other => CliError::BadInput(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
