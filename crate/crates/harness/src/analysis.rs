//! Class comparisons, aggregate statistics and performance profiles over
//! finished runs.
//!
//! Every statistic works on minimization costs (see [`CellResult::cost`]);
//! infeasible finals count as +inf and so rank behind every feasible one.

use std::collections::BTreeMap;
use std::io::Write;

use sotea_core::{DesignClass, Problem, Sense};

use crate::stats::{mann_whitney_u, median};
use crate::store::{cost_of, fmt_f64, CellResult};

/// Threshold above which a comparison is reported as "insig".
pub const INSIG_P: f64 = 0.05;
/// Second, stricter flag (99% confidence).
pub const STRICT_P: f64 = 0.01;
pub const PROFILE_STEP: u64 = 500;

/// "Found the best known" tolerance around `best`.
pub fn found_tolerance(best: f64) -> f64 {
    (1e-4 * best.abs()).max(1e-6)
}

/// A feasible result at least as good as the best known, up to tolerance.
pub fn found_best(problem: Problem, objective: f64, feasible: bool) -> bool {
    let Some(best) = problem.best_known() else { return false };
    let best_cost = cost_of(best, true, problem.sense());
    cost_of(objective, feasible, problem.sense()) <= best_cost + found_tolerance(best)
}

/// Final costs of one design on one problem, in run order.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignFinals {
    pub label: String,
    pub class: DesignClass,
    pub costs: Vec<f64>,
}

impl DesignFinals {
    pub fn median(&self) -> f64 {
        median(&self.costs).unwrap_or(f64::INFINITY)
    }
}

/// Results grouped by problem, then design in plan order.
pub fn group(results: &[CellResult]) -> BTreeMap<Problem, Vec<DesignFinals>> {
    let mut by_problem: BTreeMap<Problem, BTreeMap<usize, DesignFinals>> = BTreeMap::new();
    for r in results {
        by_problem
            .entry(r.problem)
            .or_default()
            .entry(r.config_index)
            .or_insert_with(|| DesignFinals { label: r.label.clone(), class: r.class, costs: Vec::new() })
            .costs
            .push(r.cost());
    }
    by_problem.into_iter().map(|(p, m)| (p, m.into_values().collect())).collect()
}

/// Design with the lowest median cost in `class`; ties keep the earlier design.
pub fn tuned_design(designs: &[DesignFinals], class: DesignClass) -> Option<&DesignFinals> {
    designs
        .iter()
        .filter(|d| d.class == class)
        .fold(None, |best: Option<&DesignFinals>, d| match best {
            Some(b) if b.median() <= d.median() => Some(b),
            _ => Some(d),
        })
}

fn pooled(designs: &[DesignFinals], class: DesignClass) -> Vec<f64> {
    designs.iter().filter(|d| d.class == class).flat_map(|d| d.costs.iter().copied()).collect()
}

/// Two one-sided tests; returns the side with the smaller p.
fn directional(a: &[f64], b: &[f64], ca: DesignClass, cb: DesignClass) -> (DesignClass, f64) {
    let pa = mann_whitney_u(a, b).map(|t| t.p).unwrap_or(f64::NAN);
    let pb = mann_whitney_u(b, a).map(|t| t.p).unwrap_or(f64::NAN);
    if pa <= pb { (ca, pa) } else { (cb, pb) }
}

pub const PAIRS: [(DesignClass, DesignClass); 3] = [
    (DesignClass::Pea, DesignClass::Sotea),
    (DesignClass::Cga, DesignClass::Sotea),
    (DesignClass::Pea, DesignClass::Cga),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    /// Best design of each class by median.
    Tuned,
    /// All runs of each class.
    Pooled,
}

impl Entry {
    pub fn name(self) -> &'static str {
        match self {
            Entry::Tuned => "tuned",
            Entry::Pooled => "pooled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub problem: Problem,
    pub a: DesignClass,
    pub b: DesignClass,
    pub entry: Entry,
    pub design_a: Option<String>,
    pub design_b: Option<String>,
    /// `None` when a class has no data.
    pub winner: Option<DesignClass>,
    pub p: f64,
}

impl Comparison {
    pub fn missing(&self) -> bool {
        self.design_a.is_none() || self.design_b.is_none()
    }

    pub fn significant(&self) -> bool {
        !self.missing() && self.p <= INSIG_P
    }

    /// Winner name, "insig", or "missing".
    pub fn verdict(&self) -> String {
        match self.winner {
            _ if self.missing() => "missing".into(),
            Some(w) if self.significant() => w.name().into(),
            _ => "insig".into(),
        }
    }
}

/// Three pairwise columns, each with a tuned and a pooled entry, per problem.
pub fn class_comparisons(results: &[CellResult]) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (problem, designs) in group(results) {
        for (a, b) in PAIRS {
            for entry in [Entry::Tuned, Entry::Pooled] {
                let (sa, sb, la, lb) = match entry {
                    Entry::Tuned => {
                        let ta = tuned_design(&designs, a);
                        let tb = tuned_design(&designs, b);
                        (
                            ta.map(|d| d.costs.clone()).unwrap_or_default(),
                            tb.map(|d| d.costs.clone()).unwrap_or_default(),
                            ta.map(|d| d.label.clone()),
                            tb.map(|d| d.label.clone()),
                        )
                    }
                    Entry::Pooled => {
                        let (sa, sb) = (pooled(&designs, a), pooled(&designs, b));
                        let la = (!sa.is_empty()).then(|| "all".to_string());
                        let lb = (!sb.is_empty()).then(|| "all".to_string());
                        (sa, sb, la, lb)
                    }
                };
                let (winner, p) = if la.is_some() && lb.is_some() {
                    let (w, p) = directional(&sa, &sb, a, b);
                    (Some(w), p)
                } else {
                    (None, f64::NAN)
                };
                out.push(Comparison { problem, a, b, entry, design_a: la, design_b: lb, winner, p });
            }
        }
    }
    out
}

/// One row of the overall statistics table.
///
/// Denominators: `found_best_pct`, `top5_pct` and `superiority_p` average
/// per-problem values over the problems where the class has runs.
/// `best_design_pct` and `found_best_once_pct` count those same problems.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub class: DesignClass,
    pub problems: usize,
    pub found_best_pct: f64,
    pub top5_pct: f64,
    /// Mean one-sided p of "class beats the other two classes pooled".
    pub superiority_p: f64,
    pub best_design_pct: f64,
    pub found_best_once_pct: f64,
}

impl AggregateRow {
    pub fn superior(&self) -> bool {
        self.superiority_p < INSIG_P
    }
}

/// Cost at the 5% quantile of every final in the problem (ceil(0.05 n)-th smallest).
pub fn top5_threshold(all: &[f64]) -> f64 {
    let mut v = all.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((0.05 * v.len() as f64).ceil() as usize).max(1);
    v[k - 1]
}

pub fn aggregate_stats(results: &[CellResult]) -> Vec<AggregateRow> {
    let grouped = group(results);
    let mut rows = Vec::new();
    for class in DesignClass::ALL {
        let mut acc = AggregateRow {
            class,
            problems: 0,
            found_best_pct: 0.0,
            top5_pct: 0.0,
            superiority_p: 0.0,
            best_design_pct: 0.0,
            found_best_once_pct: 0.0,
        };
        let mut p_count = 0usize;
        for (&problem, designs) in &grouped {
            let mine: Vec<&CellResult> = results.iter().filter(|r| r.problem == problem && r.class == class).collect();
            if mine.is_empty() {
                continue;
            }
            acc.problems += 1;
            let n = mine.len() as f64;
            let found = mine.iter().filter(|r| found_best(problem, r.objective, r.feasible)).count();
            acc.found_best_pct += 100.0 * found as f64 / n;
            if found > 0 {
                acc.found_best_once_pct += 1.0;
            }

            let all: Vec<f64> = designs.iter().flat_map(|d| d.costs.iter().copied()).collect();
            let threshold = top5_threshold(&all);
            acc.top5_pct += 100.0 * mine.iter().filter(|r| r.cost() <= threshold).count() as f64 / n;

            let rest: Vec<f64> = designs.iter().filter(|d| d.class != class).flat_map(|d| d.costs.iter().copied()).collect();
            if !rest.is_empty() {
                let own = pooled(designs, class);
                if let Ok(t) = mann_whitney_u(&own, &rest) {
                    acc.superiority_p += t.p;
                    p_count += 1;
                }
            }

            // ties for the best tuned median credit every tied class
            let medians: Vec<f64> = DesignClass::ALL
                .iter()
                .filter_map(|&c| tuned_design(designs, c).map(|d| d.median()))
                .collect();
            let best = medians.iter().copied().fold(f64::INFINITY, f64::min);
            if tuned_design(designs, class).is_some_and(|d| d.median() <= best) {
                acc.best_design_pct += 1.0;
            }
        }
        if acc.problems > 0 {
            let np = acc.problems as f64;
            acc.found_best_pct /= np;
            acc.top5_pct /= np;
            acc.best_design_pct *= 100.0 / np;
            acc.found_best_once_pct *= 100.0 / np;
        }
        acc.superiority_p = if p_count > 0 { acc.superiority_p / p_count as f64 } else { f64::NAN };
        rows.push(acc);
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub evals: u64,
    /// Median best-so-far objective in the problem's own sense.
    pub median_best: f64,
    pub per_run: Vec<f64>,
}

/// Evaluation grid `step, 2 step, ..., max_evals` (the endpoint is always included).
pub fn profile_grid(max_evals: u64, step: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=max_evals / step).map(|i| i * step).collect();
    if grid.last() != Some(&max_evals) {
        grid.push(max_evals);
    }
    grid
}

/// Median best-so-far of one design on one problem along the grid. Runs
/// with no feasible point yet contribute +inf cost.
pub fn performance_profile(results: &[CellResult], problem: Problem, label: &str, max_evals: u64) -> Vec<ProfilePoint> {
    let runs: Vec<&CellResult> = results.iter().filter(|r| r.problem == problem && r.label == label).collect();
    if runs.is_empty() {
        return Vec::new();
    }
    let sense = problem.sense();
    let to_objective = |c: f64| match sense {
        Sense::Minimize => c,
        Sense::Maximize => -c,
    };
    profile_grid(max_evals, PROFILE_STEP)
        .into_iter()
        .map(|evals| {
            let costs: Vec<f64> = runs
                .iter()
                .map(|r| r.best_at(evals).map_or(f64::INFINITY, |row| cost_of(row.best, row.feasible, sense)))
                .collect();
            ProfilePoint {
                evals,
                median_best: to_objective(median(&costs).expect("non-empty")),
                per_run: costs.into_iter().map(to_objective).collect(),
            }
        })
        .collect()
}

pub fn write_finals<W: Write>(out: W, results: &[CellResult]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem", "design", "class", "run", "seed", "objective", "feasible", "found_best"])?;
    for r in results {
        w.write_record([
            r.problem.name().to_string(),
            r.label.clone(),
            r.class.name().to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            fmt_f64(r.objective),
            u8::from(r.feasible).to_string(),
            u8::from(found_best(r.problem, r.objective, r.feasible)).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparisons<W: Write>(out: W, rows: &[Comparison]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem", "column", "entry", "design_a", "design_b", "winner", "p", "insig_05", "insig_01"])?;
    for c in rows {
        w.write_record([
            c.problem.name().to_string(),
            format!("{} vs {}", c.a.name(), c.b.name()),
            c.entry.name().to_string(),
            c.design_a.clone().unwrap_or_default(),
            c.design_b.clone().unwrap_or_default(),
            c.verdict(),
            fmt_f64(c.p),
            u8::from(!(c.p <= INSIG_P)).to_string(),
            u8::from(!(c.p <= STRICT_P)).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(out: W, rows: &[AggregateRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "class",
        "problems",
        "found_best_pct",
        "top5_pct",
        "superiority_p",
        "superior",
        "best_design_pct",
        "found_best_once_pct",
    ])?;
    for r in rows {
        w.write_record([
            r.class.name().to_string(),
            r.problems.to_string(),
            fmt_f64(r.found_best_pct),
            fmt_f64(r.top5_pct),
            fmt_f64(r.superiority_p),
            u8::from(r.superior()).to_string(),
            fmt_f64(r.best_design_pct),
            fmt_f64(r.found_best_once_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: one row per (problem, design, grid point).
pub fn write_profiles<W: Write>(out: W, results: &[CellResult], max_evals: u64) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem", "design", "evals", "median_best", "runs"])?;
    for (problem, designs) in group(results) {
        for d in designs {
            for pt in performance_profile(results, problem, &d.label, max_evals) {
                w.write_record([
                    problem.name().to_string(),
                    d.label.clone(),
                    pt.evals.to_string(),
                    fmt_f64(pt.median_best),
                    pt.per_run.len().to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
