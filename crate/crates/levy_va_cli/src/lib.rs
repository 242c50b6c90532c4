//! Configuration, commands and CSV output of the `levy-va` tool.

pub mod commands;
pub mod config;

pub use commands::{run, Command, Overrides, Table};
pub use config::RunConfig;
