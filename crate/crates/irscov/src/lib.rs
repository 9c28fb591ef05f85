//! Scenario files, parameter sweeps, Monte-Carlo validation and CSV/JSON
//! output on top of `irscov-core`.

pub mod config;
pub mod crossover;
pub mod error;
pub mod output;
pub mod sweep;

pub use error::{CliError, CliResult};
