//! Command-line front end for the `coherence` library.
//!
//! The binary is a thin wrapper around [`commands`]; each command writes its
//! report to the supplied writer and warnings to stderr.

#![forbid(unsafe_code)]

pub mod commands;
pub mod demo;
pub mod formats;

use formats::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or flag combinations.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or invalid input.
    #[error("{0}")]
    Invalid(String),
    /// A verification ran and reported failure.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invalid(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<coherence::Error> for CliError {
    fn from(e: coherence::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}
