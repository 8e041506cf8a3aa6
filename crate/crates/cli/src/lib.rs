//! Command-line driver: configuration, runs, diagnostics and experiments.
//!
//! Every command writes a `manifest.json` that echoes the resolved
//! configuration, defaults included. Scientific outcomes map to exit codes
//! 0 (completed), 2 (blow-up proxy) and 3 (under-resolved); any error is 1.

pub mod commands;
pub mod config;
pub mod settings;

use std::fmt;

pub use commands::{cmd_diagnose, cmd_experiment, cmd_run, ExperimentKind, EXPERIMENT_KINDS};
pub use config::Config;

/// Exit code for every error path.
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<hhalf_core::Error> for CliError {
    fn from(e: hhalf_core::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self(e.to_string())
    }
}

impl From<rayon::ThreadPoolBuildError> for CliError {
    fn from(e: rayon::ThreadPoolBuildError) -> Self {
        Self(e.to_string())
    }
}
