//! Scenario files, the stage pipeline and the report for the `frontmerge` binary.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::{load_scenario, Config};
pub use error::CliError;
pub use pipeline::{Pipeline, RunOutcome, Stage};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
