//! Deterministic, configurable runs of the CSF channel-identification
//! experiments, emitting CSV tables with JSON sidecars.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod seeds;
pub mod sim;

pub use config::{ExperimentConfig, ExperimentId, Method};
pub use error::{HarnessError, Result};
pub use experiments::{run_datalength_sweep, run_fig2, run_invariance_demo, run_snr_sweep, Report};
pub use output::{write_outputs, OutputPaths, Table};
