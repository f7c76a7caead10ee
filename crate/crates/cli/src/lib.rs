//! Experiment runner for cflab: configuration parsing, command dispatch
//! and artifact output.

pub mod config;
pub mod run;

pub use config::{parse_config, ExperimentConfig};
pub use run::{execute, run, Command, Outcome};
