//! Experiment runner: reads TOML experiment configs, runs one of the lab's
//! verifications on each and writes CSV and JSON results.
//!
//! Exit codes: 0 when every tolerance holds, 1 when a tolerance fails or a
//! run breaks down, 2 on invalid input.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use commands::{execute, Command, CommandReport, Context};
pub use config::{ExperimentConfig, Tolerances};
pub use error::CliError;

/// Result of one config file.
#[derive(Debug)]
pub struct ExperimentResult {
    pub config: PathBuf,
    pub outcome: Result<CommandReport, CliError>,
}

impl ExperimentResult {
    pub fn exit_code(&self) -> u8 {
        match &self.outcome {
            Ok(r) if r.pass => 0,
            Ok(_) => 1,
            Err(e) => e.exit_code(),
        }
    }
}

pub fn run_config(cmd: Command, path: &Path, ctx: &Context) -> ExperimentResult {
    let outcome = ExperimentConfig::load(path).and_then(|cfg| execute(cmd, &cfg, ctx));
    ExperimentResult { config: path.to_path_buf(), outcome }
}

/// Runs every config on `jobs` worker threads; results keep the input order.
pub fn run_all(cmd: Command, paths: &[PathBuf], ctx: &Context, jobs: usize) -> Result<Vec<ExperimentResult>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| paths.par_iter().map(|p| run_config(cmd, p, ctx)).collect()))
}

/// Worst exit code over all results; 0 for an empty list.
pub fn combined_exit_code(results: &[ExperimentResult]) -> u8 {
    results.iter().map(ExperimentResult::exit_code).max().unwrap_or(0)
}
