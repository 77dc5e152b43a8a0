//! Configuration-driven runs, named reproductions, invariant suites and sweeps.

pub mod catalog;
pub mod config;
mod reproduce;
mod run;
mod sweep;
pub mod verify;

pub use config::{Config, Experiment};
pub use reproduce::{cmd_reproduce, ReproduceReport};
pub use run::{cmd_run, execute, write_artifacts, Overrides, RunRecord};
pub use sweep::{cmd_sweep, SweepEntry};
pub use verify::{cmd_verify, run_suite, CheckResult};

use std::fs;
use std::path::Path;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] crate::Error),
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("{0} check(s) failed")]
    VerifyFailed(usize),
    #[error("io error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UnknownTarget(_) => 2,
            HarnessError::Solver(_) => 3,
            HarnessError::VerifyFailed(_) | HarnessError::Io(_) => 1,
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Io(e.to_string()))
}
