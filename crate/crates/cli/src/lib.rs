//! Command implementations behind the `nullfreq` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod report;

pub use error::{CliError, Result};
pub use report::RunReport;
