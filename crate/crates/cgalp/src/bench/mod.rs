//! Benchmark harness: seeded instance generators, experiment runner with
//! cached reference solutions, and log-log rate fitting.

pub mod cache;
pub mod experiment;
pub mod instances;
pub mod ratefit;

pub use experiment::{run_experiment, Experiment, ExperimentArtifacts, ExperimentConfig};
pub use instances::{gen_matcomp_instance, gen_projection_instance};
pub use ratefit::{fit_rate, RateFit};
