//! On-disk result store.
//!
//! ```text
//! <dir>/plan.json
//! <dir>/cells/<key>/meta.json
//! <dir>/cells/<key>/trace.csv        generation,evals,best,feasible
//! <dir>/cells/<key>/snapshots/g00050.dot
//! ```
//!
//! A cell directory is written under a temporary name and renamed into
//! place, so a cell with `meta.json` is always complete.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sotea_core::engines::{self, TraceRow};
use sotea_core::{DesignClass, EngineConfig, Problem, RunRecord64, Sense};
use thiserror::Error;

use crate::plan::{Cell, ExperimentPlan, PlanError, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: bad value `{value}`")]
    Parse { path: PathBuf, value: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Round-trip float text: shortest representation, `inf`/`-inf`/`nan` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Error,
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMeta {
    pub schema_version: u32,
    pub key: String,
    pub problem: Problem,
    pub label: String,
    pub class: DesignClass,
    pub config_index: usize,
    pub run: usize,
    pub seed: u64,
    pub config: EngineConfig,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub evals: u64,
    #[serde(default)]
    pub generations: usize,
    /// Final best objective in the problem's own sense, as round-trip text.
    #[serde(default)]
    pub best_objective: String,
    #[serde(default)]
    pub best_feasible: bool,
    #[serde(default)]
    pub best_genome: Vec<String>,
    #[serde(default)]
    pub panmictic: bool,
}

/// One finished run as used by the analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub problem: Problem,
    pub label: String,
    pub class: DesignClass,
    pub config_index: usize,
    pub run: usize,
    pub seed: u64,
    pub objective: f64,
    pub feasible: bool,
    pub trace: Vec<TraceRow>,
}

/// Minimization form of an objective; infeasible maps to +inf.
pub fn cost_of(objective: f64, feasible: bool, sense: Sense) -> f64 {
    if !feasible {
        return f64::INFINITY;
    }
    match sense {
        Sense::Minimize => objective,
        Sense::Maximize => -objective,
    }
}

impl CellResult {
    pub fn from_record(cell: &Cell, rec: &RunRecord64) -> Self {
        Self {
            problem: cell.problem,
            label: cell.label(),
            class: cell.config.class(),
            config_index: cell.config_index,
            run: cell.run,
            seed: cell.config.seed,
            objective: rec.best.objective(),
            feasible: rec.best.is_feasible(),
            trace: rec.trace.clone(),
        }
    }

    pub fn cost(&self) -> f64 {
        cost_of(self.objective, self.feasible, self.problem.sense())
    }

    /// Best-so-far trace row in effect after `evals` evaluations.
    pub fn best_at(&self, evals: u64) -> Option<&TraceRow> {
        let idx = self.trace.partition_point(|r| r.evals <= evals);
        idx.checked_sub(1).map(|i| &self.trace[i])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub total: usize,
    pub computed: usize,
    pub cached: usize,
    pub failed: usize,
}

#[derive(Debug, Clone)]
pub struct Store {
    pub dir: PathBuf,
    pub plan: ExperimentPlan,
}

enum Outcome {
    Computed,
    Cached,
    Failed,
}

pub fn write_trace<W: std::io::Write>(out: W, trace: &[TraceRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["generation", "evals", "best", "feasible"])?;
    for r in trace {
        w.write_record([
            r.generation.to_string(),
            r.evals.to_string(),
            fmt_f64(r.best),
            u8::from(r.feasible).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn read_trace(path: &Path) -> Result<Vec<TraceRow>, StoreError> {
    let csv_err = |source| StoreError::Csv { path: path.to_path_buf(), source };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let bad = |value: &str| StoreError::Parse { path: path.to_path_buf(), value: value.to_string() };
        let field = |i: usize| rec.get(i).unwrap_or("");
        out.push(TraceRow {
            generation: field(0).parse().map_err(|_| bad(field(0)))?,
            evals: field(1).parse().map_err(|_| bad(field(1)))?,
            best: parse_f64(field(2)).ok_or_else(|| bad(field(2)))?,
            feasible: field(3) == "1",
        });
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
    let text = serde_json::to_string_pretty(value).map_err(|source| StoreError::Json { path: path.to_path_buf(), source })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

impl Store {
    pub fn cell_dir(&self, key: &str) -> PathBuf {
        self.dir.join("cells").join(key)
    }

    /// Creates the store directory (or reuses it) and writes `plan.json`.
    pub fn create(dir: &Path, plan: ExperimentPlan) -> Result<Self, StoreError> {
        plan.validate()?;
        fs::create_dir_all(dir.join("cells")).map_err(io_err(dir))?;
        let store = Self { dir: dir.to_path_buf(), plan };
        write_json(&dir.join("plan.json"), &store.plan)?;
        Ok(store)
    }

    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        let plan = ExperimentPlan::load(&dir.join("plan.json"))?;
        Ok(Self { dir: dir.to_path_buf(), plan })
    }

    pub fn read_meta(&self, key: &str) -> Result<Option<CellMeta>, StoreError> {
        let path = self.cell_dir(key).join("meta.json");
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&text).map(Some).map_err(|source| StoreError::Json { path, source })
    }

    /// Executes every cell not already completed. Error records are retried.
    pub fn run(&self, jobs: usize) -> Result<RunSummary, StoreError> {
        let cells = self.plan.cells();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| StoreError::Pool(e.to_string()))?;
        let outcomes: Vec<Result<Outcome, StoreError>> =
            pool.install(|| cells.par_iter().map(|cell| self.run_cell(cell)).collect());
        let mut summary = RunSummary { total: cells.len(), ..Default::default() };
        for o in outcomes {
            match o? {
                Outcome::Computed => summary.computed += 1,
                Outcome::Cached => summary.cached += 1,
                Outcome::Failed => summary.failed += 1,
            }
        }
        Ok(summary)
    }

    fn run_cell(&self, cell: &Cell) -> Result<Outcome, StoreError> {
        let key = cell.key(self.plan.snapshots);
        if let Some(meta) = self.read_meta(&key)? {
            if meta.status == CellStatus::Ok {
                return Ok(Outcome::Cached);
            }
        }
        let mut meta = CellMeta {
            schema_version: SCHEMA_VERSION,
            key: key.clone(),
            problem: cell.problem,
            label: cell.label(),
            class: cell.config.class(),
            config_index: cell.config_index,
            run: cell.run,
            seed: cell.config.seed,
            config: cell.config.clone(),
            status: CellStatus::Ok,
            error: None,
            evals: 0,
            generations: 0,
            best_objective: String::new(),
            best_feasible: false,
            best_genome: Vec::new(),
            panmictic: false,
        };
        let final_dir = self.cell_dir(&key);
        let tmp = self.dir.join("cells").join(format!(".{key}.tmp"));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
        }
        fs::create_dir_all(&tmp).map_err(io_err(&tmp))?;

        let result = catch_unwind(AssertUnwindSafe(|| engines::run::<f64>(&cell.config, cell.problem)));
        let outcome = match result {
            Ok(Ok(rec)) => {
                meta.evals = rec.evals;
                meta.generations = rec.generations;
                meta.best_objective = fmt_f64(rec.best.objective());
                meta.best_feasible = rec.best.is_feasible();
                meta.best_genome = rec.best.genome.iter().map(|&x| fmt_f64(x)).collect();
                meta.panmictic = rec.panmictic;
                let trace_path = tmp.join("trace.csv");
                let file = fs::File::create(&trace_path).map_err(io_err(&trace_path))?;
                write_trace(std::io::BufWriter::new(file), &rec.trace)
                    .map_err(|source| StoreError::Csv { path: trace_path.clone(), source })?;
                if self.plan.snapshots && !rec.snapshots.is_empty() {
                    let snap_dir = tmp.join("snapshots");
                    fs::create_dir_all(&snap_dir).map_err(io_err(&snap_dir))?;
                    for s in &rec.snapshots {
                        let path = snap_dir.join(format!("g{:05}.dot", s.generation));
                        fs::write(&path, s.graph.to_dot(&format!("g{}", s.generation))).map_err(io_err(&path))?;
                    }
                }
                Outcome::Computed
            }
            Ok(Err(e)) => {
                meta.status = CellStatus::Error;
                meta.error = Some(e.to_string());
                Outcome::Failed
            }
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                meta.status = CellStatus::Error;
                meta.error = Some(format!("panic: {msg}"));
                Outcome::Failed
            }
        };
        write_json(&tmp.join("meta.json"), &meta)?;
        if final_dir.exists() {
            fs::remove_dir_all(&final_dir).map_err(io_err(&final_dir))?;
        }
        fs::rename(&tmp, &final_dir).map_err(io_err(&final_dir))?;
        Ok(outcome)
    }

    /// Completed cells in plan order, plus the metadata of failed ones.
    pub fn load_results(&self) -> Result<(Vec<CellResult>, Vec<CellMeta>), StoreError> {
        let mut ok = Vec::new();
        let mut failed = Vec::new();
        for cell in self.plan.cells() {
            let key = cell.key(self.plan.snapshots);
            let Some(meta) = self.read_meta(&key)? else { continue };
            if meta.status == CellStatus::Error {
                failed.push(meta);
                continue;
            }
            let dir = self.cell_dir(&key);
            let meta_path = dir.join("meta.json");
            let objective = parse_f64(&meta.best_objective)
                .ok_or_else(|| StoreError::Parse { path: meta_path.clone(), value: meta.best_objective.clone() })?;
            ok.push(CellResult {
                problem: meta.problem,
                label: meta.label,
                class: meta.class,
                config_index: meta.config_index,
                run: meta.run,
                seed: meta.seed,
                objective,
                feasible: meta.best_feasible,
                trace: read_trace(&dir.join("trace.csv"))?,
            });
        }
        Ok((ok, failed))
    }

    /// DOT snapshot files of one cell, sorted by generation.
    pub fn snapshot_paths(&self, key: &str) -> Result<Vec<PathBuf>, StoreError> {
        let dir = self.cell_dir(key).join("snapshots");
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "dot"))
            .collect();
        paths.sort();
        Ok(paths)
    }
}
