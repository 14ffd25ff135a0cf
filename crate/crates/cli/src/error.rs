//! CLI error type with the exit-code contract: 2 for configuration
//! problems, 3 for data problems, 4 for numerical failures.

use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, bad config file, or an infeasible parameter combination
    /// caught at validation time.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unreadable or malformed input data.
    #[error("data error: {0}")]
    Data(String),
    /// A computation failed after validation passed.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        CliError::Data(msg.to_string())
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        CliError::Numerical(msg.to_string())
    }

    /// Add a stage name to the message, for pipeline abort reports.
    pub fn at_stage(self, stage: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("stage {stage}: {m}")),
            CliError::Data(m) => CliError::Data(format!("stage {stage}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("stage {stage}: {m}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
