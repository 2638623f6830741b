//! Command-line pipeline around the `logicorp` library.

pub mod build;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;

pub use build::{run_build, BuildSummary};
pub use config::{ConfigFile, PipelineConfig};
pub use error::CliError;
