//! Evolutionary engines behind one interface: the self-organizing topology
//! EA, a ring cellular GA, and panmictic ES/GA designs.
//!
//! Every engine minimizes the cost (objective negated for maximization
//! problems) and never exceeds the evaluation budget. A generation that the
//! budget cuts short still contributes its evaluated offspring to the
//! best-so-far trace.

mod cga;
mod pea;
mod sotea;

use std::cmp::Ordering;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, PopulationGraph};
use crate::problems::{Evaluation, Problem, ProblemError, Sense};
use crate::scalar::Scalar;
use crate::selection::{feasibility_order, FitnessComparator, Scored, SelectionError, SelectionScheme};
use crate::topology::TopologyError;
use crate::variation::{Domain, OperatorSet, VariationError};

pub use cga::ring_neighborhood;

pub const DEFAULT_POP_SIZE: usize = 50;
pub const DEFAULT_MAX_EVALS: u64 = 150_000;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 50;
/// Redraws allowed when a parent walk returns to its start.
pub const PARTNER_REDRAWS: usize = 10;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Variation(#[from] VariationError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    pub genome: Vec<T>,
    pub eval: Evaluation<T>,
    /// Generations survived.
    pub age: usize,
}

impl<T: Scalar> Individual<T> {
    pub fn new(problem: Problem, genome: Vec<T>) -> Result<Self, EngineError> {
        let eval = problem.evaluate(&genome)?;
        Ok(Self { genome, eval, age: 0 })
    }

    pub fn cost(&self) -> f64 {
        self.eval.cost().as_f64()
    }

    pub fn objective(&self) -> f64 {
        self.eval.objective.as_f64()
    }

    pub fn is_feasible(&self) -> bool {
        self.eval.is_feasible()
    }
}

impl<T: Scalar> Scored for Individual<T> {
    #[inline]
    fn cost_f64(&self) -> f64 {
        self.eval.cost().as_f64()
    }

    #[inline]
    fn penalty_f64(&self) -> f64 {
        self.eval.penalty().as_f64()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EsUpdate {
    /// lambda = 2 mu offspring; only the best parent survives into the pool.
    Generational,
    /// lambda = mu offspring; every parent enters the pool.
    PseudoSteadyState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Sotea { k_max: usize },
    Cga { radius: usize },
    PeaEs { update: EsUpdate, selection: SelectionScheme, operators: OperatorSet },
    PeaGa { selection: SelectionScheme, operators: OperatorSet },
}

impl Family {
    pub fn class(&self) -> DesignClass {
        match self {
            Family::Sotea { .. } => DesignClass::Sotea,
            Family::Cga { .. } => DesignClass::Cga,
            Family::PeaEs { .. } | Family::PeaGa { .. } => DesignClass::Pea,
        }
    }
}

/// The three design classes compared in the reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignClass {
    Pea,
    Cga,
    Sotea,
}

impl DesignClass {
    pub const ALL: [DesignClass; 3] = [DesignClass::Pea, DesignClass::Cga, DesignClass::Sotea];

    pub fn name(self) -> &'static str {
        match self {
            DesignClass::Pea => "PEA",
            DesignClass::Cga => "cGA",
            DesignClass::Sotea => "SOTEA",
        }
    }
}

fn default_pop_size() -> usize {
    DEFAULT_POP_SIZE
}

fn default_max_evals() -> u64 {
    DEFAULT_MAX_EVALS
}

fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "default_pop_size")]
    pub pop_size: usize,
    #[serde(default = "default_max_evals")]
    pub max_evals: u64,
    #[serde(default)]
    pub seed: u64,
    /// Optional generation cap applied on top of the evaluation budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_generations: Option<usize>,
    /// Topology snapshot interval in generations; 0 disables snapshots.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

impl EngineConfig {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            pop_size: DEFAULT_POP_SIZE,
            max_evals: DEFAULT_MAX_EVALS,
            seed: 0,
            max_generations: None,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }

    pub fn sotea(k_max: usize) -> Self {
        Self::new(Family::Sotea { k_max })
    }

    pub fn cga(radius: usize) -> Self {
        Self::new(Family::Cga { radius })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_evals(mut self, max_evals: u64) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_pop_size(mut self, pop_size: usize) -> Self {
        self.pop_size = pop_size;
        self
    }

    pub fn with_max_generations(mut self, generations: usize) -> Self {
        self.max_generations = Some(generations);
        self
    }

    /// Short identifier such as `sotea_k7`, `cga_r12`, `es_gen_trunc_7`.
    pub fn label(&self) -> String {
        fn sel(s: SelectionScheme) -> &'static str {
            match s {
                SelectionScheme::BinaryTournament => "tour",
                SelectionScheme::Truncation => "trunc",
                SelectionScheme::LinearRanking => "lin",
                SelectionScheme::UniformRandom => "unif",
            }
        }
        match self.family {
            Family::Sotea { k_max } => format!("sotea_k{k_max}"),
            Family::Cga { radius } => format!("cga_r{radius}"),
            Family::PeaEs { update, selection, operators } => {
                let u = match update {
                    EsUpdate::Generational => "gen",
                    EsUpdate::PseudoSteadyState => "pss",
                };
                format!("es_{u}_{}_{}", sel(selection), operators.count())
            }
            Family::PeaGa { selection, operators } => format!("ga_{}_{}", sel(selection), operators.count()),
        }
    }

    pub fn class(&self) -> DesignClass {
        self.family.class()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if self.max_evals == 0 {
            return bad("max_evals must be positive".into());
        }
        match self.family {
            Family::Sotea { k_max } => {
                if self.pop_size < 3 {
                    return bad(format!("SOTEA needs at least 3 nodes, got {}", self.pop_size));
                }
                if k_max < crate::topology::SetPointPolicy::K_MIN {
                    return bad(format!("k_max {k_max} below the minimum degree 3"));
                }
            }
            Family::Cga { radius } => {
                if self.pop_size < 3 {
                    return bad(format!("cGA needs at least 3 nodes, got {}", self.pop_size));
                }
                if radius == 0 {
                    return bad("cGA radius must be at least 1".into());
                }
            }
            Family::PeaEs { update, selection, .. } => {
                let min = if update == EsUpdate::Generational { 4 } else { 2 };
                if self.pop_size < min {
                    return bad(format!("ES population of {} is too small", self.pop_size));
                }
                if !matches!(selection, SelectionScheme::BinaryTournament | SelectionScheme::Truncation) {
                    return bad("ES survivor selection is tournament or truncation".into());
                }
            }
            Family::PeaGa { selection, .. } => {
                if self.pop_size < 2 {
                    return bad(format!("GA population of {} is too small", self.pop_size));
                }
                if !matches!(selection, SelectionScheme::BinaryTournament | SelectionScheme::LinearRanking) {
                    return bad("GA parent selection is tournament or linear ranking".into());
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for EngineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub const CGA_RADII: [usize; 5] = [1, 2, 4, 8, 12];
pub const SOTEA_K_MAX: [usize; 4] = [3, 5, 7, 9];

/// The 8 ES designs, 4 GA designs, the cGA radius sweep and the SOTEA
/// `k_max` sweep, all at default population and budget.
pub fn design_matrix() -> Vec<EngineConfig> {
    let mut out = Vec::new();
    for update in [EsUpdate::Generational, EsUpdate::PseudoSteadyState] {
        for selection in [SelectionScheme::Truncation, SelectionScheme::BinaryTournament] {
            for operators in [OperatorSet::Seven, OperatorSet::Two] {
                out.push(EngineConfig::new(Family::PeaEs { update, selection, operators }));
            }
        }
    }
    for selection in [SelectionScheme::LinearRanking, SelectionScheme::BinaryTournament] {
        for operators in [OperatorSet::Seven, OperatorSet::Two] {
            out.push(EngineConfig::new(Family::PeaGa { selection, operators }));
        }
    }
    out.extend(CGA_RADII.map(EngineConfig::cga));
    out.extend(SOTEA_K_MAX.map(EngineConfig::sotea));
    out
}

/// One row of the best-so-far trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub generation: usize,
    pub evals: u64,
    /// Objective of the best individual seen so far, in the problem's own sense.
    pub best: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub generation: usize,
    pub graph: PopulationGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T> {
    pub label: String,
    pub problem: Problem,
    pub seed: u64,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<Snapshot>,
    pub best: Individual<T>,
    pub evals: u64,
    pub generations: usize,
    /// Set when a cGA neighborhood covers the whole population.
    pub panmictic: bool,
}

impl<T: Scalar> RunRecord<T> {
    pub fn sense(&self) -> Sense {
        self.problem.sense()
    }

    /// Final best cost (minimization form); infeasible results map to +inf.
    pub fn final_cost(&self) -> f64 {
        if self.best.is_feasible() { self.best.cost() } else { f64::INFINITY }
    }

    /// Best-so-far trace row in effect after `evals` evaluations.
    pub fn best_at(&self, evals: u64) -> Option<&TraceRow> {
        let idx = self.trace.partition_point(|r| r.evals <= evals);
        idx.checked_sub(1).map(|i| &self.trace[i])
    }
}

/// Best-so-far bookkeeping shared by all engines.
pub(crate) struct Tracker<T> {
    pub best: Option<Individual<T>>,
    pub evals: u64,
    pub max_evals: u64,
    pub trace: Vec<TraceRow>,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(max_evals: u64) -> Self {
        Self { best: None, evals: 0, max_evals, trace: Vec::new() }
    }

    #[inline]
    pub fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    pub fn evaluate(&mut self, problem: Problem, genome: Vec<T>) -> Individual<T> {
        debug_assert!(!self.exhausted());
        let eval = problem.evaluate_unchecked(&genome);
        self.evals += 1;
        let ind = Individual { genome, eval, age: 0 };
        let better = match &self.best {
            None => true,
            Some(b) => feasibility_order(&ind, b) == Ordering::Less,
        };
        if better {
            self.best = Some(ind.clone());
        }
        ind
    }

    pub fn record(&mut self, generation: usize) {
        let b = self.best.as_ref().expect("at least one evaluation");
        self.trace.push(TraceRow { generation, evals: self.evals, best: b.objective(), feasible: b.is_feasible() });
    }
}

/// Shared per-run context.
pub(crate) struct Ctx<'a> {
    pub problem: Problem,
    pub domain: Domain,
    pub comparator: FitnessComparator,
    pub cfg: &'a EngineConfig,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a EngineConfig, problem: Problem) -> Self {
        Self {
            problem,
            domain: Domain::of(problem),
            comparator: FitnessComparator::for_problem(problem.is_constrained()),
            cfg,
        }
    }

    pub fn generation_allowed(&self, generation: usize) -> bool {
        self.cfg.max_generations.is_none_or(|g| generation <= g)
    }

    pub fn wants_snapshot(&self, generation: usize) -> bool {
        self.cfg.snapshot_every > 0 && generation > 0 && generation % self.cfg.snapshot_every == 0
    }

    pub fn initial_population<Rn: rand::Rng + ?Sized, T: Scalar>(
        &self,
        tracker: &mut Tracker<T>,
        rng: &mut Rn,
    ) -> Vec<Individual<T>> {
        let mut pop = Vec::with_capacity(self.cfg.pop_size);
        while pop.len() < self.cfg.pop_size && !tracker.exhausted() {
            let genome = self.domain.sample(rng);
            pop.push(tracker.evaluate(self.problem, genome));
        }
        pop
    }
}

fn finish<T: Scalar>(
    cfg: &EngineConfig,
    problem: Problem,
    tracker: Tracker<T>,
    snapshots: Vec<Snapshot>,
    generations: usize,
    panmictic: bool,
) -> RunRecord<T> {
    RunRecord {
        label: cfg.label(),
        problem,
        seed: cfg.seed,
        evals: tracker.evals,
        best: tracker.best.expect("budget allows at least one evaluation"),
        trace: tracker.trace,
        snapshots,
        generations,
        panmictic,
    }
}

/// Runs `cfg` on `problem` with a generator seeded from `cfg.seed`.
pub fn run<T: Scalar>(cfg: &EngineConfig, problem: Problem) -> Result<RunRecord<T>, EngineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run_with_rng(cfg, problem, &mut rng)
}

pub fn run_with_rng<T: Scalar, R: rand::Rng + ?Sized>(
    cfg: &EngineConfig,
    problem: Problem,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    cfg.validate()?;
    let ctx = Ctx::new(cfg, problem);
    match cfg.family {
        Family::Sotea { k_max } => sotea::run(&ctx, k_max, rng),
        Family::Cga { radius } => cga::run(&ctx, radius, rng),
        Family::PeaEs { update, selection, operators } => pea::run_es(&ctx, update, selection, operators, rng),
        Family::PeaGa { selection, operators } => pea::run_ga(&ctx, selection, operators, rng),
    }
}

pub fn run_sotea<T: Scalar, R: rand::Rng + ?Sized>(
    cfg: &EngineConfig,
    problem: Problem,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    family_guard(cfg, matches!(cfg.family, Family::Sotea { .. }))?;
    run_with_rng(cfg, problem, rng)
}

pub fn run_cga<T: Scalar, R: rand::Rng + ?Sized>(
    cfg: &EngineConfig,
    problem: Problem,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    family_guard(cfg, matches!(cfg.family, Family::Cga { .. }))?;
    run_with_rng(cfg, problem, rng)
}

pub fn run_pea_es<T: Scalar, R: rand::Rng + ?Sized>(
    cfg: &EngineConfig,
    problem: Problem,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    family_guard(cfg, matches!(cfg.family, Family::PeaEs { .. }))?;
    run_with_rng(cfg, problem, rng)
}

pub fn run_pea_ga<T: Scalar, R: rand::Rng + ?Sized>(
    cfg: &EngineConfig,
    problem: Problem,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    family_guard(cfg, matches!(cfg.family, Family::PeaGa { .. }))?;
    run_with_rng(cfg, problem, rng)
}

fn family_guard(cfg: &EngineConfig, ok: bool) -> Result<(), EngineError> {
    if ok {
        Ok(())
    } else {
        Err(EngineError::InvalidConfig(format!("wrong family for this runner: {}", cfg.label())))
    }
}
