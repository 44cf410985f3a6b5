//! Config-driven experiment runner for the `opensys` engines.

pub mod config;
pub mod experiments;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentKind, Model, Tolerances};
pub use output::{Artifacts, Table};

/// Environment variable that redirects all experiment outputs.
pub const OUTPUT_DIR_ENV: &str = "OPENSYS_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("engine error: {0}")]
    Engine(opensys_core::Error),
    #[error("{0}")]
    NonConvergence(opensys_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<opensys_core::Error> for RunError {
    fn from(e: opensys_core::Error) -> Self {
        match e {
            opensys_core::Error::NonConvergence { .. } => RunError::NonConvergence(e),
            other => RunError::Engine(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Engine(_) => 3,
            RunError::NonConvergence(_) => 4,
            RunError::Io(_) => 1,
        }
    }
}

/// Parses, runs and writes one experiment. Nothing is written when the config
/// is invalid or the engine fails; a non-converged run leaves only a metadata
/// file marked as partial.
pub fn run_config_file(path: &Path, override_dir: Option<&Path>) -> Result<Vec<PathBuf>, RunError> {
    let cfg = ExperimentConfig::from_path(path)?;
    run_config(&cfg, override_dir)
}

pub fn run_config(cfg: &ExperimentConfig, override_dir: Option<&Path>) -> Result<Vec<PathBuf>, RunError> {
    let prefix = output::resolve_prefix(&cfg.output, override_dir);
    match experiments::run_experiment(cfg) {
        Ok(artifacts) => Ok(output::write_all(&prefix, cfg, &artifacts)?),
        Err(RunError::NonConvergence(e)) => {
            output::write_failure(&prefix, cfg, "non_convergence", &e.to_string())?;
            Err(RunError::NonConvergence(e))
        }
        Err(e) => Err(e),
    }
}

/// JSON schema of the config file format.
pub fn config_schema() -> String {
    let schema = schemars::schema_for!(config::ConfigFile);
    serde_json::to_string_pretty(&schema).expect("schema serializes")
}
