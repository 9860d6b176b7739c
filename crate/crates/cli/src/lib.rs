//! Experiment runner for `ftqlab`: typed run configuration from config files
//! and flags, one runner per subcommand, CSV and JSON artifacts that embed
//! the resolved configuration, and the exit-code contract of the binary.

pub mod app;
pub mod config;
pub mod run;

pub use config::{ConfigError, ConfigFile, RunConfig};
pub use run::{run, Format, Outcome, RunError};
