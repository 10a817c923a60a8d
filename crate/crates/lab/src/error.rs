//! Lab-level error type, mapped to process exit codes by the CLI.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Configuration problems: parsing, validation, unknown keys, missing
    /// sections. CLI exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failures inside a workflow. CLI exit code 3.
    #[error("numerical failure: {0}")]
    Numerics(String),

    /// Signal-analysis precondition violations.
    #[error("signal analysis: {0}")]
    Signal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<beamslider_core::Error> for LabError {
    fn from(e: beamslider_core::Error) -> Self {
        use beamslider_core::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::OutOfDomain { .. }
            | E::EmptyGrid
            | E::NotMonotone { .. } => LabError::Config(e.to_string()),
            _ => LabError::Numerics(e.to_string()),
        }
    }
}

impl LabError {
    /// Process exit code for the CLI: 2 for configuration errors, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
