//! Sweeps, file output and the command line around `langevin-homog-core`.

pub mod cli;
pub mod config;
mod error;
pub mod output;
pub mod pipeline;
pub mod rhs;
pub mod sweep;

pub use config::SweepConfig;
pub use error::{HarnessError, Result};
pub use sweep::{run_sweep, run_sweep_with, ConvergenceRecord, SweepOutput, SweepRow};
