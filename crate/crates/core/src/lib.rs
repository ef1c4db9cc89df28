//! Self-organizing topology evolutionary algorithm (SOTEA) and its baselines.
//!
//! The population of a SOTEA lives on an undirected graph that is rewired
//! every generation: fitter nodes are pushed toward higher degree, and links
//! are moved to raise a fitness-weighted clustering coefficient. Mating
//! partners come from two-step random walks on that graph.
//!
//! The crate also holds a ring cellular GA, panmictic ES/GA designs, the
//! twelve benchmark problems, network statistics and reference graph
//! generators. Numeric code is generic over [`Scalar`] (`f32` or `f64`).

pub mod engines;
pub mod graph;
pub mod growth;
pub mod metrics;
pub mod problems;
pub mod scalar;
pub mod selection;
pub mod topology;
pub mod variation;

pub use engines::{design_matrix, run, DesignClass, EngineConfig, EngineError, Family, Individual, RunRecord, TraceRow};
pub use graph::{GraphError, PopulationGraph};
pub use problems::{Evaluation, Problem, ProblemError, Sense};
pub use scalar::Scalar;
pub use topology::{RankTable, SetPointPolicy};

pub type Individual64 = Individual<f64>;
pub type Individual32 = Individual<f32>;
pub type Evaluation64 = Evaluation<f64>;
pub type Evaluation32 = Evaluation<f32>;
pub type RunRecord64 = RunRecord<f64>;
pub type RunRecord32 = RunRecord<f32>;
