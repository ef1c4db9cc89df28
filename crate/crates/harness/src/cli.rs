//! The `sotea` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sotea_core::growth::{tail_exponent, GrowthConfig};
use sotea_core::metrics::{AveragedReport, StudyCell, TopologyReport, TopologyStudy};
use sotea_core::problems::registry;
use sotea_core::{DesignClass, PopulationGraph};

use crate::analysis;
use crate::plan::ExperimentPlan;
use crate::store::{fmt_f64, Store};

#[derive(Debug, Parser)]
#[command(name = "sotea", version, about = "Self-organizing topology EA experiments")]
pub struct Cli {
    /// Seed base (overrides the plan's `seed_base`, seeds generators)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for `run`
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a plan into a result store (resumes completed cells)
    Run { plan: PathBuf },
    /// Emit the full design-matrix plan
    Sweep {
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        max_evals: Option<u64>,
        /// Only print the cell count
        #[arg(long)]
        dry_run: bool,
    },
    /// Comparison tables, overall statistics and profiles as CSV
    Analyze { store: PathBuf },
    /// Network statistics of stored snapshots, or the standalone topology study
    Topology {
        store: Option<PathBuf>,
        /// Run the topology study; optional JSON protocol file
        #[arg(long, num_args = 0..=1, conflicts_with = "store")]
        study: Option<Option<PathBuf>>,
    },
    /// Grow reference networks from a JSON model description (object or list)
    Grow { config: PathBuf },
    /// List the benchmark problems
    Problems {
        #[arg(long)]
        json: bool,
    },
}

fn out_dir(cli_dir: &Option<PathBuf>, fallback: &Path) -> Result<PathBuf> {
    let dir = cli_dir.clone().unwrap_or_else(|| fallback.to_path_buf());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_csv(path: &Path, f: impl FnOnce(fs::File) -> csv::Result<()>) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f(file).with_context(|| format!("writing {}", path.display()))
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Problems { json } => problems(*json, stdout),
        Command::Sweep { runs, max_evals, dry_run } => {
            let mut plan = ExperimentPlan::sweep();
            if let Some(r) = runs {
                plan = plan.with_runs(*r);
            }
            if let Some(m) = max_evals {
                plan = plan.with_max_evals(*m);
            }
            if let Some(s) = cli.seed {
                plan = plan.with_seed_base(s);
            }
            plan.validate()?;
            if *dry_run {
                writeln!(
                    stdout,
                    "cells: {} ({} problems x {} configs x {} runs)",
                    plan.cell_count(),
                    plan.problems.len(),
                    plan.configs.len(),
                    plan.runs_per_config
                )?;
            } else if let Some(dir) = &cli.out_dir {
                fs::create_dir_all(dir)?;
                let path = dir.join("sweep.json");
                fs::write(&path, plan.to_json() + "\n")?;
                writeln!(stdout, "{}", path.display())?;
            } else {
                writeln!(stdout, "{}", plan.to_json())?;
            }
            Ok(())
        }
        Command::Run { plan } => {
            let mut p = ExperimentPlan::load(plan).with_context(|| format!("loading {}", plan.display()))?;
            if let Some(s) = cli.seed {
                p.seed_base = s;
            }
            let dir = out_dir(&cli.out_dir, Path::new("sotea-out"))?;
            let store = Store::create(&dir, p)?;
            let s = store.run(cli.jobs)?;
            writeln!(
                stdout,
                "{}: {} cells, {} computed, {} cached, {} failed",
                dir.display(),
                s.total,
                s.computed,
                s.cached,
                s.failed
            )?;
            Ok(())
        }
        Command::Analyze { store } => {
            let dir = out_dir(&cli.out_dir, &store.join("analysis"))?;
            let files = analyze(store, &dir)?;
            for f in files {
                writeln!(stdout, "{}", f.display())?;
            }
            Ok(())
        }
        Command::Topology { store, study } => {
            if let Some(protocol) = study {
                let mut s = match protocol {
                    Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
                        .with_context(|| format!("parsing {}", path.display()))?,
                    None => TopologyStudy::default(),
                };
                if let Some(seed) = cli.seed {
                    s.seed_base = seed;
                }
                let dir = out_dir(&cli.out_dir, Path::new("sotea-out"))?;
                let path = dir.join("topology_study.csv");
                let cells = s.run()?;
                write_csv(&path, |f| write_study(f, &cells))?;
                writeln!(stdout, "{}", path.display())?;
            } else {
                let Some(store) = store else { bail!("topology needs a store directory or --study") };
                let dir = out_dir(&cli.out_dir, &store.join("analysis"))?;
                let path = dir.join("topology.csv");
                let rows = store_topology(store)?;
                write_csv(&path, |f| write_store_topology(f, &rows))?;
                writeln!(stdout, "{}", path.display())?;
            }
            Ok(())
        }
        Command::Grow { config } => {
            let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            let configs = match serde_json::from_str::<OneOrMany>(&text)? {
                OneOrMany::One(c) => vec![c],
                OneOrMany::Many(v) => v,
            };
            let dir = out_dir(&cli.out_dir, Path::new("sotea-out"))?;
            let path = dir.join("growth.csv");
            let rows = grow(&configs, cli.seed.unwrap_or(0), &dir)?;
            write_csv(&path, |f| write_growth(f, &rows))?;
            writeln!(stdout, "{}", path.display())?;
            Ok(())
        }
    }
}

fn problems(json: bool, out: &mut dyn Write) -> Result<()> {
    let reg = registry();
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&reg)?)?;
        return Ok(());
    }
    for spec in reg {
        let best = spec.best_known.map_or("-".to_string(), fmt_f64);
        writeln!(
            out,
            "{:<16} dim={:<3} constraints={} sense={:<8} best={}",
            spec.name,
            spec.dim,
            spec.n_constraints,
            match spec.sense {
                sotea_core::Sense::Minimize => "min",
                sotea_core::Sense::Maximize => "max",
            },
            best
        )?;
    }
    Ok(())
}

/// Writes the analysis CSVs into `dir` and returns their paths.
pub fn analyze(store_dir: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let store = Store::open(store_dir)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let (results, failed) = store.load_results()?;
    let max_evals = store.plan.max_evals;
    let mut files = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(fs::File) -> csv::Result<()>| -> Result<()> {
        let path = dir.join(name);
        write_csv(&path, f)?;
        files.push(path);
        Ok(())
    };
    emit("finals.csv", &|f| analysis::write_finals(f, &results))?;
    emit("comparisons.csv", &|f| analysis::write_comparisons(f, &analysis::class_comparisons(&results)))?;
    emit("aggregate.csv", &|f| analysis::write_aggregate(f, &analysis::aggregate_stats(&results)))?;
    emit("profiles.csv", &|f| analysis::write_profiles(f, &results, max_evals))?;
    emit("errors.csv", &|f| {
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["problem", "design", "run", "error"])?;
        for m in &failed {
            w.write_record([m.problem.name(), &m.label, &m.run.to_string(), m.error.as_deref().unwrap_or("")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(files)
}

const REPORT_METRICS: [&str; 11] =
    ["samples", "n", "path_length", "k_ave", "c_ave", "c_rand", "l_rand", "ck_slope", "ck_intercept", "v", "poisson_chi2"];

fn report_values(r: &AveragedReport) -> [f64; 11] {
    let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
    [
        r.samples as f64,
        r.n as f64,
        r.path_length,
        r.k_ave,
        r.c_ave,
        r.c_rand,
        r.l_rand,
        opt(r.ck_slope),
        opt(r.ck_intercept),
        opt(r.v),
        r.poisson_chi2,
    ]
}

/// Averaged snapshot report per (problem, design) over graph-based cells.
pub fn store_topology(store_dir: &Path) -> Result<Vec<(String, String, AveragedReport)>> {
    let store = Store::open(store_dir)?;
    let mut out = Vec::new();
    let mut current: Option<(String, String, Vec<TopologyReport>)> = None;
    for cell in store.plan.cells() {
        if cell.config.class() == DesignClass::Pea {
            continue;
        }
        let key = cell.key(store.plan.snapshots);
        let id = (cell.problem.name().to_string(), cell.label());
        if current.as_ref().is_some_and(|c| (c.0.as_str(), c.1.as_str()) != (id.0.as_str(), id.1.as_str())) {
            let (p, l, reports) = current.take().expect("checked");
            if let Some(avg) = AveragedReport::from_reports(&reports) {
                out.push((p, l, avg));
            }
        }
        let entry = current.get_or_insert_with(|| (id.0.clone(), id.1.clone(), Vec::new()));
        for path in store.snapshot_paths(&key)? {
            let g = PopulationGraph::from_dot(&fs::read_to_string(&path)?)
                .with_context(|| format!("parsing {}", path.display()))?;
            entry.2.push(TopologyReport::of_largest_component(&g)?);
        }
    }
    if let Some((p, l, reports)) = current {
        if let Some(avg) = AveragedReport::from_reports(&reports) {
            out.push((p, l, avg));
        }
    }
    Ok(out)
}

fn write_store_topology(f: fs::File, rows: &[(String, String, AveragedReport)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["problem", "design", "metric", "value"])?;
    for (p, l, r) in rows {
        for (name, v) in REPORT_METRICS.iter().zip(report_values(r)) {
            w.write_record([p.as_str(), l.as_str(), name, &fmt_f64(v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Long format keyed by N and K_Max; `k_max = all` rows average over K_Max.
pub fn write_study<W: Write>(out: W, cells: &[StudyCell]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k_max", "metric", "value"])?;
    let mut sizes: Vec<usize> = cells.iter().map(|c| c.n).collect();
    sizes.dedup();
    for n in sizes {
        let group: Vec<&StudyCell> = cells.iter().filter(|c| c.n == n).collect();
        for c in &group {
            for (name, v) in REPORT_METRICS.iter().zip(report_values(&c.report)) {
                w.write_record([n.to_string(), c.k_max.to_string(), name.to_string(), fmt_f64(v)])?;
            }
        }
        let rows: Vec<[f64; 11]> = group.iter().map(|c| report_values(&c.report)).collect();
        for (i, name) in REPORT_METRICS.iter().enumerate() {
            let mean = rows.iter().map(|r| r[i]).sum::<f64>() / rows.len() as f64;
            w.write_record([n.to_string(), "all".into(), name.to_string(), fmt_f64(mean)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(GrowthConfig),
    Many(Vec<GrowthConfig>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub index: usize,
    pub model: &'static str,
    pub nodes: usize,
    pub edges: usize,
    pub component: usize,
    pub gamma: Option<f64>,
    pub report: TopologyReport,
}

/// Generates each model with seed `seed + index`, writes its DOT file and
/// measures its largest component.
pub fn grow(configs: &[GrowthConfig], seed: u64, dir: &Path) -> Result<Vec<GrowthRow>> {
    let mut rows = Vec::new();
    for (index, cfg) in configs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + index as u64);
        let g = cfg.generate(&mut rng)?;
        fs::write(dir.join(format!("grow_{index}_{}.dot", cfg.name())), g.to_dot(cfg.name()))?;
        let lc = g.largest_component();
        rows.push(GrowthRow {
            index,
            model: cfg.name(),
            nodes: g.node_count(),
            edges: g.edge_count(),
            component: lc.node_count(),
            gamma: tail_exponent(&g, 1, 10),
            report: TopologyReport::of(&lc)?,
        });
    }
    Ok(rows)
}

fn write_growth(f: fs::File, rows: &[GrowthRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(f);
    w.write_record([
        "index", "model", "nodes", "edges", "component", "k_ave", "c_ave", "path_length", "c_rand", "l_rand", "ck_slope",
        "v", "gamma", "poisson_chi2",
    ])?;
    let opt = |v: Option<f64>| fmt_f64(v.unwrap_or(f64::NAN));
    for r in rows {
        let t = &r.report;
        w.write_record([
            r.index.to_string(),
            r.model.to_string(),
            r.nodes.to_string(),
            r.edges.to_string(),
            r.component.to_string(),
            fmt_f64(t.k_ave),
            fmt_f64(t.c_ave),
            fmt_f64(t.path_length),
            fmt_f64(t.c_rand),
            fmt_f64(t.l_rand),
            opt(t.ck_slope()),
            opt(t.v()),
            opt(r.gamma),
            fmt_f64(t.poisson_chi2),
        ])?;
    }
    w.flush()?;
    Ok(())
}
