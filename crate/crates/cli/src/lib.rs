//! Command-line front end: config-driven experiments, output files, and
//! standalone fit/summarize tools for PSVM summary maps.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use error::{CliError, CliResult};
