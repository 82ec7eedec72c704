//! Driver for the `austere` command-line tool: config parsing, family
//! construction, sample sweeps and report rendering.

mod build;
mod commands;
pub mod config;

use thiserror::Error;

pub use build::{build_immersion, parse_curve};
pub use commands::{
    cmd_classify, cmd_family, cmd_holomorphy, cmd_slag, cmd_verify, Failure, HolomorphyRecord,
    HolomorphySummary, Outcome, PointRecord, Report, SlagRecord, SlagSummary, SweepSummary,
};
pub use config::{Format, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("numerical fault: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Family,
    Verify,
    Classify,
    Slag,
    Holomorphy,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Family => cmd_family(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Classify => cmd_classify(cfg),
        Command::Slag => cmd_slag(cfg),
        Command::Holomorphy => cmd_holomorphy(cfg),
    }
}
