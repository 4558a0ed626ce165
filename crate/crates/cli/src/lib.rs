//! Experiment sweep runner around the simulation core.
//!
//! The library half of the command-line tool: a TOML-backed configuration
//! type whose defaults are the reference operating point, a runner that
//! expands the configured sweep axes into records and computes each one from
//! seed-derived substreams, and a CSV writer with a stable numeric format.
//! The binary in `main.rs` is a thin argument-parsing shell over these.

pub mod config;
pub mod csvio;
pub mod runner;

pub use config::ExperimentConfig;
pub use csvio::{write_csv, write_csv_to};
pub use runner::{run, ExperimentRecord};
