//! Library surface of the command-line front end: configuration files,
//! checkpoint persistence and report writers. The `hire` binary is a thin
//! dispatcher over these pieces.

pub mod checkpoint;
pub mod config;
pub mod reports;

/// Error carrying its process exit code: 1 internal, 2 input/validation,
/// 3 compatibility.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn compat(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn from_hire(e: hire::Error) -> Self {
        CliError::input(e.to_string())
    }
}
