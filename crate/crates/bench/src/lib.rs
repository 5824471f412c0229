//! Experiment driver for the `fasmg` solver: configuration, CSV output and
//! the runs behind each subcommand.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiments;

pub use config::{Experiment, Overrides, RunConfig};
pub use error::{BenchError, BenchResult};
