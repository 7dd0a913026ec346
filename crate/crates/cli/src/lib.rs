//! Experiment driver: config-driven sweeps written as CSV, and verification
//! suites over the simulator's invariants.

pub mod config;
pub mod error;
pub mod sweep;
pub mod verify;

pub use config::{ExperimentConfig, Method};
pub use error::{CliError, Result};
pub use sweep::{run_sweep, write_csv, write_csv_atomic, ReportRow, HEADER};
pub use verify::{verify, Check, SUITES};
