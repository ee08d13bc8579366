//! Library surface of the experiment runner, used by the binary and by the
//! integration suites.

pub mod config;
pub mod manifest;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, TaskConfig};
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use runner::{replay, run, ReplayReport, RunError, RunOutcome};
