//! Experiment runner for the landau-core laboratory: TOML configs in, CSV tables,
//! a deterministic JSON summary and an append-only run log out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fit_report;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiments::{run, SUBCOMMANDS};
pub use report::{Check, Outcome};
