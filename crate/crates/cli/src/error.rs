use std::process::ExitCode;

use thiserror::Error;
use zeeman_core::Error as CoreError;

/// Failure classes, one exit code each.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("not converged: {0}")]
    NonConvergence(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Config(_) => 2,
            Self::Data(_) => 3,
            Self::NonConvergence(_) => 4,
            Self::Io(_) => 5,
        })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::AllCensored | CoreError::InsufficientData { .. } | CoreError::EmptyWindow { .. } => {
                Self::Data(e.to_string())
            }
            CoreError::NotConverged { .. } | CoreError::TruncationNotConverged { .. } | CoreError::RootPolish { .. } => {
                Self::NonConvergence(e.to_string())
            }
            CoreError::InvalidParameter { .. }
            | CoreError::LevelOutOfRange { .. }
            | CoreError::PopulationInversion { .. }
            | CoreError::DimensionTooLarge { .. } => Self::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
