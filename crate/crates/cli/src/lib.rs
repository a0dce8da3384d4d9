//! Batch front end for the `linfol` library: configs, verification ops,
//! JSON-lines reports and tables.

pub mod config;
pub mod instance;
pub mod ops;
pub mod report;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("unknown op {0:?}")]
    UnknownOp(String),
    #[error("unknown table selector {0:?} (expected one of entropy, margins, constants)")]
    UnknownSelector(String),
    #[error("instance line {line}: {message}")]
    Instance { line: usize, message: String },
    #[error("report line {line}: {message}")]
    Report { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// 2 for anything the user can fix in the invocation or inputs.
    pub fn exit_code(&self) -> u8 {
        2
    }
}
