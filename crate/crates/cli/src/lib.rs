//! Command-line front end for `gpt-cloak`.

pub mod commands;
pub mod config;
pub mod csv;
pub mod files;

pub use commands::{run, Outcome, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
pub use config::{Cli, Command};
