//! Experiment harness behind the `ase` binary.

pub mod commands;
pub mod config;
pub mod experiments;

pub use commands::{run, Cli, Command};
pub use config::RunConfig;
