//! Experiment plans and their expansion into cells.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sotea_core::engines::{design_matrix, DEFAULT_MAX_EVALS};
use sotea_core::{EngineConfig, Problem};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_RUNS: usize = 30;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan schema version {found}, expected {SCHEMA_VERSION}")]
    Schema { found: u32 },
    #[error("runs_per_config must be at least 1")]
    NoRuns,
    #[error("plan lists no {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_runs() -> usize {
    DEFAULT_RUNS
}
fn default_evals() -> u64 {
    DEFAULT_MAX_EVALS
}
fn yes() -> bool {
    true
}

/// Problems x configs x runs, with seeds `seed_base + run`.
///
/// `max_evals` and `max_generations` override the per-config values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub problems: Vec<Problem>,
    pub configs: Vec<EngineConfig>,
    #[serde(default = "default_runs")]
    pub runs_per_config: usize,
    #[serde(default = "default_evals")]
    pub max_evals: u64,
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
    /// Write DOT snapshots for graph-based designs.
    #[serde(default = "yes")]
    pub snapshots: bool,
}

/// One (problem, config, run) unit of work. `config` carries the final
/// seed and budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub problem: Problem,
    pub config_index: usize,
    pub run: usize,
    pub config: EngineConfig,
}

#[derive(Serialize)]
struct KeyInput<'a> {
    schema_version: u32,
    problem: Problem,
    config: &'a EngineConfig,
    snapshots: bool,
}

impl Cell {
    pub fn label(&self) -> String {
        self.config.label()
    }

    /// Content hash of everything that determines the cell's output.
    pub fn key(&self, snapshots: bool) -> String {
        let input = KeyInput { schema_version: SCHEMA_VERSION, problem: self.problem, config: &self.config, snapshots };
        let bytes = serde_json::to_vec(&input).expect("cell key serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

impl ExperimentPlan {
    pub fn new(problems: Vec<Problem>, configs: Vec<EngineConfig>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problems,
            configs,
            runs_per_config: DEFAULT_RUNS,
            max_evals: DEFAULT_MAX_EVALS,
            seed_base: 0,
            max_generations: None,
            snapshots: true,
        }
    }

    /// Every problem against the full 21-design matrix.
    pub fn sweep() -> Self {
        Self::new(Problem::ALL.to_vec(), design_matrix())
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs_per_config = runs;
        self
    }

    pub fn with_max_evals(mut self, max_evals: u64) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_seed_base(mut self, seed: u64) -> Self {
        self.seed_base = seed;
        self
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(PlanError::Schema { found: self.schema_version });
        }
        if self.runs_per_config == 0 {
            return Err(PlanError::NoRuns);
        }
        if self.problems.is_empty() {
            return Err(PlanError::Empty("problems"));
        }
        if self.configs.is_empty() {
            return Err(PlanError::Empty("configs"));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.problems.len() * self.configs.len() * self.runs_per_config
    }

    /// Cells ordered problem, config, run.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &problem in &self.problems {
            for (config_index, base) in self.configs.iter().enumerate() {
                for run in 0..self.runs_per_config {
                    let mut config = base.clone().with_seed(self.seed_base + run as u64).with_max_evals(self.max_evals);
                    if self.max_generations.is_some() {
                        config.max_generations = self.max_generations;
                    }
                    out.push(Cell { problem, config_index, run, config });
                }
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let plan: Self = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, PlanError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}
