//! Configuration-driven experiment runner for `cornerlab`.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod run;

pub use config::{load_config, parse_config_str, Command, ExperimentConfig};
pub use error::{CliError, CliResult, EXIT_NUMERIC, EXIT_OK, EXIT_VALIDATION, EXIT_VIOLATED};
pub use run::{run, Outcome, RunOptions};
