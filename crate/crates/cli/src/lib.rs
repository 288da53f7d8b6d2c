//! Command-line front end for `volterra-core`.
//!
//! Every subcommand is a plain function returning a [`Status`] or a
//! [`CliError`]; `main` only parses flags and maps the result to a process
//! exit code.

pub mod commands;
pub mod io;
pub mod plot;

use std::fmt;

use volterra_core::Error;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    CheckFailed = 1,
    InputError = 2,
    InvariantViolation = 3,
    IntegrationFailure = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            status: Status::InputError,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self {
            status: Status::InvariantViolation,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self {
            status: Status::CheckFailed,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidChain { .. } => Status::InvariantViolation,
            Error::InvalidArgument(_) | Error::InvalidNodes(_) | Error::Inapplicable(_) => {
                Status::InputError
            }
            Error::Integration { .. } | Error::NegativeAmplitude { .. } | Error::Degenerate(_) => {
                Status::IntegrationFailure
            }
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
