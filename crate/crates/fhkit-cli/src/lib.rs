//! Scenario runner and subcommands for the fhkit toolkit.

pub mod config;
pub mod corpus;
pub mod error;
pub mod ops;
pub mod runner;

pub use error::{CliError, Result};
