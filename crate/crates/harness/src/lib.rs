//! Experiment harness for the `ddesim` solver: configuration files, benchmark
//! problems with reference values, and the command implementations behind the CLI.

// `!(x > y)` is used on purpose so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builtins;
pub mod commands;
pub mod config;
pub mod error;
pub mod oracle;
pub mod output;

pub use config::RunConfig;
pub use error::{HarnessError, Result};
