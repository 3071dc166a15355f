//! Command-line front end: config files, single solves, SCF runs,
//! convergence sweeps and phase-space grids, all written as CSV.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, Result};
