//! Batch front end: experiment configs, orchestration and the artifact bundle.

// `!(x > 0.0)` is the NaN-rejecting form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, simulate_stage, Bundle, Failure};
