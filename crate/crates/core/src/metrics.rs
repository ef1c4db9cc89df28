//! Network statistics for population topologies: path length, clustering,
//! degree distribution, degree correlations and random-graph baselines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engines::{self, EngineConfig, EngineError, RunRecord};
use crate::graph::PopulationGraph;
use crate::problems::Problem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph needs at least {0} nodes")]
    TooSmall(usize),
    #[error("node {0} has no neighbors")]
    Isolated(usize),
    #[error("random baseline undefined for mean degree {0} <= 1")]
    UndefinedBaseline(f64),
}

/// Mean shortest-path length over all unordered node pairs.
pub fn characteristic_path_length(g: &PopulationGraph) -> Result<f64, MetricsError> {
    let n = g.node_count();
    if n < 2 {
        return Err(MetricsError::TooSmall(2));
    }
    let mut total = 0u64;
    for s in 0..n {
        let dist = g.bfs_distances(s);
        for &d in &dist[s + 1..] {
            if d == usize::MAX {
                return Err(MetricsError::Disconnected);
            }
            total += d as u64;
        }
    }
    Ok(total as f64 / (n * (n - 1) / 2) as f64)
}

/// `2 e_i / (k_i (k_i - 1))`; nodes with fewer than two neighbors score 0.
pub fn clustering_coefficient(g: &PopulationGraph, node: usize) -> f64 {
    let k = g.deg(node);
    if k < 2 {
        return 0.0;
    }
    let e = g.closed_pair_weight(node, |_, _| 1.0);
    2.0 * e / (k * (k - 1)) as f64
}

pub fn average_clustering(g: &PopulationGraph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    (0..n).map(|i| clustering_coefficient(g, i)).sum::<f64>() / n as f64
}

pub fn average_degree(g: &PopulationGraph) -> f64 {
    if g.node_count() == 0 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / g.node_count() as f64
}

/// Count of nodes per degree, indexed by degree.
pub fn degree_histogram(g: &PopulationGraph) -> Vec<usize> {
    let degs = g.degrees();
    let mut hist = vec![0; degs.iter().copied().max().map_or(0, |m| m + 1)];
    for d in degs {
        hist[d] += 1;
    }
    hist
}

/// `(L_rand, c_rand) = (ln n / ln k, k / n)`.
pub fn random_baselines(n: usize, k_ave: f64) -> Result<(f64, f64), MetricsError> {
    if k_ave.is_nan() || k_ave <= 1.0 {
        return Err(MetricsError::UndefinedBaseline(k_ave));
    }
    Ok(((n as f64).ln() / k_ave.ln(), k_ave / n as f64))
}

/// Mean degree of the neighbors of `node`.
pub fn nearest_neighbor_degree(g: &PopulationGraph, node: usize) -> Result<f64, MetricsError> {
    let nb = g.neighbors(node);
    if nb.is_empty() {
        return Err(MetricsError::Isolated(node));
    }
    Ok(nb.iter().map(|&j| g.deg(j) as f64).sum::<f64>() / nb.len() as f64)
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// `None` when fewer than two distinct x values are present.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit { slope, intercept: my - slope * mx })
}

/// Clustering-degree fit over per-node points and the `k_NN` slope over
/// degree-binned means. Isolated nodes are left out of the `k_NN` fit.
/// Either fit is `None` when all degrees coincide.
pub fn correlation_slopes(g: &PopulationGraph) -> (Option<LineFit>, Option<LineFit>) {
    let n = g.node_count();
    let ck: Vec<(f64, f64)> = (0..n).map(|i| (g.deg(i) as f64, clustering_coefficient(g, i))).collect();
    let mut bins: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for i in 0..n {
        if let Ok(knn) = nearest_neighbor_degree(g, i) {
            let e = bins.entry(g.deg(i)).or_insert((0.0, 0));
            e.0 += knn;
            e.1 += 1;
        }
    }
    let kk: Vec<(f64, f64)> = bins.into_iter().map(|(k, (s, c))| (k as f64, s / c as f64)).collect();
    (fit_line(&ck), fit_line(&kk))
}

/// Pearson chi-square of the degree histogram against Poisson(k_ave).
/// Degrees with expected count below 1 are pooled into the upper tail.
pub fn poisson_chi_square(hist: &[usize], k_ave: f64) -> f64 {
    let n: usize = hist.iter().sum();
    if n == 0 || k_ave <= 0.0 {
        return f64::NAN;
    }
    let total = n as f64;
    let limit = hist.len() + (10.0 * k_ave) as usize + 64;
    let mut pmf = (-k_ave).exp();
    let mut cum = 0.0;
    let mut chi = 0.0;
    let mut k = 0usize;
    loop {
        if total * (1.0 - cum - pmf) < 1.0 || k >= limit {
            let obs_tail: usize = hist.iter().skip(k).sum();
            let exp_tail = (total * (1.0 - cum)).max(f64::MIN_POSITIVE);
            chi += (obs_tail as f64 - exp_tail).powi(2) / exp_tail;
            break;
        }
        let expected = total * pmf;
        if expected > 0.0 {
            let observed = hist.get(k).copied().unwrap_or(0) as f64;
            chi += (observed - expected).powi(2) / expected;
        }
        cum += pmf;
        k += 1;
        pmf *= k_ave / k as f64;
    }
    chi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub n: usize,
    pub path_length: f64,
    pub k_ave: f64,
    pub k_hist: Vec<usize>,
    pub c_ave: f64,
    pub c_rand: f64,
    pub l_rand: f64,
    pub ck_fit: Option<LineFit>,
    pub knn_fit: Option<LineFit>,
    pub poisson_chi2: f64,
}

impl TopologyReport {
    /// Requires a connected graph; baselines are NaN when `k_ave <= 1`.
    pub fn of(g: &PopulationGraph) -> Result<Self, MetricsError> {
        let path_length = characteristic_path_length(g)?;
        let k_ave = average_degree(g);
        let (l_rand, c_rand) = random_baselines(g.node_count(), k_ave).unwrap_or((f64::NAN, f64::NAN));
        let k_hist = degree_histogram(g);
        let (ck_fit, knn_fit) = correlation_slopes(g);
        Ok(Self {
            n: g.node_count(),
            path_length,
            k_ave,
            poisson_chi2: poisson_chi_square(&k_hist, k_ave),
            k_hist,
            c_ave: average_clustering(g),
            c_rand,
            l_rand,
            ck_fit,
            knn_fit,
        })
    }

    /// Report of the largest component, for generators that may disconnect.
    pub fn of_largest_component(g: &PopulationGraph) -> Result<Self, MetricsError> {
        Self::of(&g.largest_component())
    }

    pub fn ck_slope(&self) -> Option<f64> {
        self.ck_fit.map(|f| f.slope)
    }

    pub fn v(&self) -> Option<f64> {
        self.knn_fit.map(|f| f.slope)
    }
}

/// Mean of a set of reports. Slopes average over the reports where they
/// are defined; histograms are summed and divided by the report count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedReport {
    pub samples: usize,
    pub n: usize,
    pub path_length: f64,
    pub k_ave: f64,
    pub k_hist: Vec<f64>,
    pub c_ave: f64,
    pub c_rand: f64,
    pub l_rand: f64,
    pub ck_slope: Option<f64>,
    pub ck_intercept: Option<f64>,
    pub v: Option<f64>,
    pub poisson_chi2: f64,
}

impl AveragedReport {
    pub fn from_reports(reports: &[TopologyReport]) -> Option<Self> {
        let first = reports.first()?;
        let m = reports.len() as f64;
        let mean = |f: &dyn Fn(&TopologyReport) -> f64| reports.iter().map(f).sum::<f64>() / m;
        let mean_opt = |f: &dyn Fn(&TopologyReport) -> Option<f64>| {
            let vals: Vec<f64> = reports.iter().filter_map(f).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        let width = reports.iter().map(|r| r.k_hist.len()).max().unwrap_or(0);
        let mut k_hist = vec![0.0; width];
        for r in reports {
            for (k, &c) in r.k_hist.iter().enumerate() {
                k_hist[k] += c as f64 / m;
            }
        }
        let k_ave = mean(&|r| r.k_ave);
        let (l_rand, c_rand) = random_baselines(first.n, k_ave).unwrap_or((f64::NAN, f64::NAN));
        Some(Self {
            samples: reports.len(),
            n: first.n,
            path_length: mean(&|r| r.path_length),
            k_ave,
            k_hist,
            c_ave: mean(&|r| r.c_ave),
            c_rand,
            l_rand,
            ck_slope: mean_opt(&|r| r.ck_slope()),
            ck_intercept: mean_opt(&|r| r.ck_fit.map(|f| f.intercept)),
            v: mean_opt(&|r| r.v()),
            poisson_chi2: mean(&|r| r.poisson_chi2),
        })
    }
}

/// Protocol of the topology study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyStudy {
    pub problem: Problem,
    pub sizes: Vec<usize>,
    pub k_max: Vec<usize>,
    pub runs: usize,
    pub generations: usize,
    pub snapshot_every: usize,
    pub seed_base: u64,
}

impl Default for TopologyStudy {
    fn default() -> Self {
        Self {
            problem: Problem::Rastrigin,
            sizes: vec![50, 100, 200],
            k_max: engines::SOTEA_K_MAX.to_vec(),
            runs: 10,
            generations: 1000,
            snapshot_every: 50,
            seed_base: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub n: usize,
    pub k_max: usize,
    pub report: AveragedReport,
}

impl TopologyStudy {
    pub fn config(&self, n: usize, k_max: usize, run: usize) -> EngineConfig {
        let mut cfg = EngineConfig::sotea(k_max)
            .with_pop_size(n)
            .with_seed(self.seed_base + run as u64)
            .with_max_generations(self.generations)
            .with_max_evals(u64::MAX);
        cfg.snapshot_every = self.snapshot_every;
        cfg
    }

    /// Snapshot reports of one (N, K_Max) cell across all runs.
    pub fn cell_reports(&self, n: usize, k_max: usize) -> Result<Vec<TopologyReport>, StudyError> {
        let mut out = Vec::new();
        for run in 0..self.runs {
            let rec: RunRecord<f64> = engines::run(&self.config(n, k_max, run), self.problem)?;
            for s in &rec.snapshots {
                out.push(TopologyReport::of(&s.graph)?);
            }
        }
        Ok(out)
    }

    /// Averaged report per (N, K_Max), sizes outermost.
    pub fn run(&self) -> Result<Vec<StudyCell>, StudyError> {
        let mut cells = Vec::new();
        for &n in &self.sizes {
            for &k_max in &self.k_max {
                let reports = self.cell_reports(n, k_max)?;
                if let Some(report) = AveragedReport::from_reports(&reports) {
                    cells.push(StudyCell { n, k_max, report });
                }
            }
        }
        Ok(cells)
    }
}

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(n: usize) -> PopulationGraph {
        PopulationGraph::from_edges(n, &(1..n).map(|i| (0, i)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn path_length_examples() {
        assert_eq!(characteristic_path_length(&PopulationGraph::complete(10)).unwrap(), 1.0);
        let path = PopulationGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!((characteristic_path_length(&path).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        // even cycle: each node sees two nodes at each distance 1..n/2-1 and one at n/2
        let n = 50usize;
        let per_node: usize = (1..n / 2).map(|d| 2 * d).sum::<usize>() + n / 2;
        let expected = (n * per_node / 2) as f64 / (n * (n - 1) / 2) as f64;
        let l = characteristic_path_length(&PopulationGraph::ring(n).unwrap()).unwrap();
        assert!((l - expected).abs() < 1e-12);
        assert!((l - 12.755).abs() < 1e-3);
        let split = PopulationGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(characteristic_path_length(&split), Err(MetricsError::Disconnected));
    }

    #[test]
    fn clustering_examples() {
        let k = PopulationGraph::complete(6);
        assert!((0..6).all(|i| clustering_coefficient(&k, i) == 1.0));
        assert_eq!(average_clustering(&PopulationGraph::ring(50).unwrap()), 0.0);
        // K4 minus edge (2,3): nodes 0 and 1 have degree 3 with two closed pairs
        let kite = PopulationGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert!((clustering_coefficient(&kite, 0) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(clustering_coefficient(&kite, 2), 1.0);
        assert_eq!(clustering_coefficient(&star(5), 1), 0.0);
    }

    #[test]
    fn baselines() {
        let (l, c) = random_baselines(50, 3.6).unwrap();
        assert!((c - 0.072).abs() < 1e-12);
        assert!((l - 50f64.ln() / 3.6f64.ln()).abs() < 1e-12);
        assert!((l - 3.054).abs() < 1e-3);
        assert_eq!(random_baselines(50, 2.0).unwrap().1, 0.04);
        assert!(random_baselines(50, 1.0).is_err());
    }

    #[test]
    fn knn_examples() {
        let s = star(5);
        assert_eq!(nearest_neighbor_degree(&s, 0).unwrap(), 1.0);
        assert_eq!(nearest_neighbor_degree(&s, 3).unwrap(), 4.0);
        let ring = PopulationGraph::ring(9).unwrap();
        assert!((0..9).all(|i| nearest_neighbor_degree(&ring, i).unwrap() == 2.0));
        assert_eq!(nearest_neighbor_degree(&PopulationGraph::empty(3), 1), Err(MetricsError::Isolated(1)));
        assert_eq!(correlation_slopes(&ring), (None, None));
    }

    #[test]
    fn ck_slope_negative_for_hub_and_clusters() {
        // hub 0 joined to three triangles: hub clustering is low, triangle nodes high
        let mut edges = vec![];
        for t in 0..3 {
            let a = 1 + 3 * t;
            edges.extend([(a, a + 1), (a + 1, a + 2), (a, a + 2), (0, a)]);
        }
        let g = PopulationGraph::from_edges(10, &edges).unwrap();
        let (ck, _) = correlation_slopes(&g);
        assert!(ck.unwrap().slope < 0.0);
    }

    #[test]
    fn assortativity_on_bridged_cliques() {
        // two K4s joined by one edge (3, 4): degrees are 3 (six nodes) and 4 (two bridge nodes)
        let mut edges = vec![(3, 4)];
        for base in [0, 4] {
            for a in 0..4 {
                for b in (a + 1)..4 {
                    edges.push((base + a, base + b));
                }
            }
        }
        let g = PopulationGraph::from_edges(8, &edges).unwrap();
        // degree 3 nodes: neighbors are two degree-3 and one degree-4 -> 10/3
        // degree 4 nodes: three degree-3 and one degree-4 -> 13/4
        let (_, kk) = correlation_slopes(&g);
        let slope = (13.0 / 4.0) - (10.0 / 3.0);
        assert!((kk.unwrap().slope - slope).abs() < 1e-12);
    }

    #[test]
    fn histogram_consistency() {
        let g = PopulationGraph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (4, 5)]).unwrap();
        let h = degree_histogram(&g);
        assert_eq!(h.iter().sum::<usize>(), 6);
        let mean = h.iter().enumerate().map(|(k, &c)| (k * c) as f64).sum::<f64>() / 6.0;
        assert!((mean - average_degree(&g)).abs() < 1e-12);
    }

    #[test]
    fn chi_square_small_for_poisson_like() {
        // histogram proportional to Poisson(3) pmf scaled to 1000 nodes
        let mut hist = vec![];
        let mut p = (-3.0f64).exp();
        for k in 0..15 {
            hist.push((1000.0 * p).round() as usize);
            p *= 3.0 / (k + 1) as f64;
        }
        let mean = hist.iter().enumerate().map(|(k, &c)| (k * c) as f64).sum::<f64>() / hist.iter().sum::<usize>() as f64;
        assert!(poisson_chi_square(&hist, mean) < 5.0);
        let mut spike = vec![0; 10];
        spike[3] = 1000;
        assert!(poisson_chi_square(&spike, 3.0) > 500.0);
    }
}
