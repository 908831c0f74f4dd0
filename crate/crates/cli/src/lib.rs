//! Command-line front end: configuration files, demo instances, subcommands,
//! report writers and the built-in selftest.

pub mod commands;
pub mod config;
pub mod demos;
pub mod error;
pub mod report;
pub mod selftest;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
