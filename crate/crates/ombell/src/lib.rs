//! Command-line companion of `ombell-core`: configuration files and presets,
//! parallel sweeps, CSV/JSON output and run manifests.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod presets;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
