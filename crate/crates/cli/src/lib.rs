//! Scenario runner for the contact-bundles verification suites.
//!
//! A run resolves a [`ScenarioConfig`], executes the scenario on a rayon pool
//! of the requested size, and returns a [`Report`] whose status is PASS iff
//! every check record passes.

use std::time::Instant;

use thiserror::Error;

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{FileConfig, ScenarioConfig, Tolerances, SCENARIOS};
pub use report::{CheckRecord, Report, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Default worker count: the environment variable, else rayon's default.
pub fn resolve_threads(cfg: &ScenarioConfig) -> Result<Option<usize>, CliError> {
    match cfg.threads {
        Some(n) => Ok(Some(n)),
        None => config::threads_from_env(),
    }
}

pub fn run(cfg: &ScenarioConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = resolve_threads(cfg)? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Scenario(e.to_string()))?;
    let start = Instant::now();
    let checks = pool.install(|| scenarios::run(cfg));
    Ok(Report::new(cfg, checks, start.elapsed().as_secs_f64()))
}
