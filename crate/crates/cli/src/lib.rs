//! Library behind the `synsem` command: run configuration, training,
//! evaluation, ablation grids, the case-study demo and format conversion.

pub mod ablate;
pub mod config;
pub mod convert;
pub mod demo;
pub mod error;
pub mod fixtures;
pub mod train;

pub use config::RunConfig;
pub use error::{CliError, CliResult, ErrorKind};
