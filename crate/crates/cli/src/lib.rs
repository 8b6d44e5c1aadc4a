//! Experiment runner, CSV export and acceptance suite for `lyastep-core`.

pub mod acceptance;
pub mod config;
pub mod csv_out;
pub mod error;
pub mod experiments;

pub use config::{Params, RunConfig};
pub use error::{CliError, CliResult};
