//! Configuration, caching and experiment drivers behind the `scatter` binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod criteria;
pub mod error;

pub use commands::{run, Subcommand};
pub use config::{RawConfig, RunConfig};
pub use error::CliError;
