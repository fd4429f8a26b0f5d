//! Experiment harness around `mfw-core`: JSON configs, shipped presets, and
//! CSV writers for trajectories and diagnostics.

pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;

pub use config::{ExperimentConfig, Sweep};
pub use error::CliError;
pub use experiment::{run_experiment, run_sweep, RunOutcome, SweepOutcome};

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "MFW_OUTPUT_DIR";
