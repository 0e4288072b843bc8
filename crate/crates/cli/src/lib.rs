//! Library side of the `degen-blowup` experiment runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
mod output;

use std::path::{Path, PathBuf};

use degen_blowup::Error;

pub use output::Artifacts;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Status {
    Ok = 0,
    Config = 1,
    Nonconvergence = 2,
    Certification = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    pub fn status(&self) -> Status {
        match self {
            RunError::Config(_) | RunError::Io(_) => Status::Config,
            RunError::Core(e) => match e {
                Error::Ordering { .. } | Error::BoundaryData { .. } => Status::Certification,
                Error::SingularPivot { .. } | Error::Numeric { .. } => Status::Nonconvergence,
                _ => Status::Config,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Rate,
    VerifySubsuper,
    Exhaust,
    B2,
    Sweep,
}

impl Command {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "solve" => Command::Solve,
            "rate" => Command::Rate,
            "verify-subsuper" => Command::VerifySubsuper,
            "exhaust" => Command::Exhaust,
            "b2" => Command::B2,
            "sweep" => Command::Sweep,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Rate => "rate",
            Command::VerifySubsuper => "verify-subsuper",
            Command::Exhaust => "exhaust",
            Command::B2 => "b2",
            Command::Sweep => "sweep",
        }
    }
}

/// What a command produced: a status, a one-line summary and its files.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub summary: String,
    pub artifacts: Artifacts,
}

pub const THREADS_ENV: &str = "DEGEN_BLOWUP_THREADS";

/// Runs `command` and writes its files under `out`. Nothing is written when
/// the configuration is rejected.
pub fn run(command: Command, config: Option<&Path>, out: Option<&Path>) -> Result<Outcome, RunError> {
    if command == Command::Sweep {
        let path = config.ok_or_else(|| RunError::Config("sweep needs --config".into()))?;
        return commands::sweep(path, &out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out")));
    }
    let cfg = match config {
        Some(path) => config::ExperimentConfig::load(path)?,
        None => config::ExperimentConfig::default(),
    };
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.run.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let outcome = commands::execute(command, &cfg)?;
    outcome.artifacts.write(&out_dir)?;
    Ok(outcome)
}
