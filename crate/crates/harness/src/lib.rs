//! Experiment driver: geometry sequences, solve chains with subspace
//! transfer and optional warm-start Krylov-Schur, reference eigenspaces and
//! CSV output.

pub mod chain;
pub mod config;
pub mod geometry;
pub mod oracle;
pub mod output;

pub use chain::{run_chain, RunSummary, StepResult};
pub use config::{ExperimentConfig, Problem};
pub use geometry::generate_geometry_sequence;
