//! File formats, instance generation and the command-line front end for
//! [`feederplan_core`].

use std::fmt;

pub mod commands;
pub mod formats;
pub mod generate;

pub use commands::{run, Cli, Command};

/// A failure with a machine-readable code, for errors that do not come from
/// the core crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(code: &'static str, message: String) -> Self {
        Self { code, message }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Code for the error JSON written on failure.
pub fn error_code(err: &anyhow::Error) -> &'static str {
    if let Some(f) = err.downcast_ref::<Failure>() {
        f.code
    } else if let Some(e) = err.downcast_ref::<feederplan_core::Error>() {
        e.code()
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "error"
    }
}

/// `{"error": {"code", "message"}}`.
pub fn error_json(err: &anyhow::Error) -> serde_json::Value {
    serde_json::json!({
        "error": {
            "code": error_code(err),
            "message": format!("{err:#}"),
        }
    })
}
