//! Experiment orchestration for the SOTEA study: plans, a resumable result
//! store, Mann-Whitney statistics, class comparisons and the `sotea` CLI.

pub mod analysis;
pub mod cli;
pub mod plan;
pub mod stats;
pub mod store;

pub use plan::{Cell, ExperimentPlan};
pub use store::{CellResult, RunSummary, Store};
