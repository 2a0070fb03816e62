//! Configuration parsing, experiment drivers, and result serialization.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{MeshKind, RunConfig};
pub use experiment::{
    convergence_study, run_experiment, section_to_csv, Axis, ExperimentOptions, RunSummary,
    StudySummary,
};
