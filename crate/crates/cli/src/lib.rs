//! Batch front-end for `dissipforge`: JSON scenario configs in, CSV and JSON
//! artifacts out.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_str, Scenario, ScenarioConfig};
pub use run::{run, RunOptions, RunSummary};

use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
