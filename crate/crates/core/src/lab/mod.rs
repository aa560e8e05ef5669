//! Experiment orchestration: configuration, fixtures, normalization, density
//! and `W^{1,delta}` checks, and report emission.
//!
//! An experiment computes everything in memory and the coordinator writes
//! all files at the end, so a failed run leaves no partial outputs.

pub mod checks;
pub mod config;
pub mod fixtures;
pub mod run;

pub use checks::{
    density_check, left_surrogate, normalize, w1delta_verify, Check, Density, OpeningLevels,
    Provenance, VerifyReport,
};
pub use config::{ExperimentConfig, Fixture, Kind};
pub use run::{execute, run_experiment, Outcome};
