use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Budget(String),

    #[error("{0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] markovlen::Error),
}

/// Machine-readable form written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport<'a> {
    pub error: &'a str,
    pub exit_code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_invalid",
            CliError::Budget(_) | CliError::Core(markovlen::Error::BudgetExceeded { .. }) => {
                "budget_exceeded"
            }
            CliError::Verification(_) => "verification_failed",
            CliError::Io { .. } => "io",
            CliError::Core(_) => "config_invalid",
        }
    }

    /// 2 config invalid, 3 budget exceeded, 4 verification failure, 1 I/O.
    pub fn exit_code(&self) -> u8 {
        match self.kind() {
            "config_invalid" => 2,
            "budget_exceeded" => 3,
            "verification_failed" => 4,
            _ => 1,
        }
    }

    pub fn report(&self) -> ErrorReport<'static> {
        ErrorReport {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}
