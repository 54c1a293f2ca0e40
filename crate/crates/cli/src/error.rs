use std::path::Path;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 2;
    pub const INVALID_INPUT: i32 = 3;
    pub const IO: i32 = 4;
    pub const NON_CONVERGENCE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => exit::INVALID_INPUT,
            CliError::Io { .. } => exit::IO,
            CliError::NonConvergence(_) => exit::NON_CONVERGENCE,
            CliError::VerificationFailed(_) => exit::VERIFICATION_FAILED,
        }
    }
}
