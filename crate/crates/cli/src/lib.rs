//! Command-line front end for `robust-bayes-core`: run configuration, CSV
//! output, a rayon executor for replications, and the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;
pub mod setup;

pub use commands::GlobalOptions;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use exec::RayonExecutor;
