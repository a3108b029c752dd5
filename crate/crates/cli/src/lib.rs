//! Batch front end: reads tree, model and claim files, runs one check or
//! pricing per invocation and writes a self-describing JSON report.
//!
//! Exit codes: 0 when the command computed a result (the verdict is in the
//! report), 2 for input errors, 3 for numerical failures.

pub mod commands;
pub mod error;
pub mod input;
pub mod report;
mod verify;

pub use commands::{run, Cli, Command};
pub use error::CliError;
pub use report::RunReport;
