//! Reference network generators: preferential attachment, duplication with
//! divergence, and an intrinsic-fitness model.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::PopulationGraph;

pub const DD_DELTA: f64 = 0.53;
pub const DD_ALPHA_COEFF: f64 = 0.06;
pub const DD_SEED_SIZE: usize = 5;
pub const FITNESS_X_MAX: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("preferential attachment needs 1 <= m < m0 and m0 >= 3, got m = {m}, m0 = {m0}")]
    InvalidAttachment { m0: usize, m: usize },
    #[error("target size {target} must exceed the seed size {seed}")]
    TargetTooSmall { target: usize, seed: usize },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("fitness maximum must be positive, got {0}")]
    InvalidMaximum(f64),
    #[error("fitness value {value} outside [0, {max}]")]
    FitnessOutOfRange { value: f64, max: f64 },
    #[error("need at least {0} nodes")]
    TooFewNodes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessDistribution {
    /// Rate-1 exponential truncated at `x_max`.
    Exponential,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GrowthConfig {
    Ba { m0: usize, m: usize, n: usize },
    Dd {
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_alpha")]
        alpha_coeff: f64,
        n: usize,
    },
    Fitness {
        n: usize,
        rho: FitnessDistribution,
        #[serde(default = "default_x_max")]
        x_max: f64,
    },
}

fn default_delta() -> f64 {
    DD_DELTA
}

fn default_alpha() -> f64 {
    DD_ALPHA_COEFF
}

fn default_x_max() -> f64 {
    FITNESS_X_MAX
}

impl GrowthConfig {
    pub fn name(&self) -> &'static str {
        match self {
            GrowthConfig::Ba { .. } => "ba",
            GrowthConfig::Dd { .. } => "dd",
            GrowthConfig::Fitness { .. } => "fitness",
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PopulationGraph, GrowthError> {
        match *self {
            GrowthConfig::Ba { m0, m, n } => ba_grow(m0, m, n, rng),
            GrowthConfig::Dd { delta, alpha_coeff, n } => {
                dd_grow(&PopulationGraph::ring(DD_SEED_SIZE).expect("seed ring"), delta, alpha_coeff, n, rng)
            }
            GrowthConfig::Fitness { n, rho, x_max } => fitness_model_generate(n, rho, x_max, rng).map(|(g, _)| g),
        }
    }
}

/// Preferential-attachment state: the graph plus a stub list in which each
/// node appears once per incident edge.
#[derive(Debug, Clone)]
pub struct BaState {
    pub graph: PopulationGraph,
    stubs: Vec<usize>,
}

impl BaState {
    pub fn seed(m0: usize) -> Result<Self, GrowthError> {
        let graph = PopulationGraph::ring(m0).map_err(|_| GrowthError::InvalidAttachment { m0, m: 0 })?;
        let stubs = graph.edges().into_iter().flat_map(|(a, b)| [a, b]).collect();
        Ok(Self { graph, stubs })
    }

    /// Attachment probability of every node, `k_i / sum_j k_j`.
    pub fn attachment_probabilities(&self) -> Vec<f64> {
        let total = self.stubs.len() as f64;
        self.graph.degrees().into_iter().map(|k| k as f64 / total).collect()
    }

    /// One degree-proportional draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.stubs[rng.gen_range(0..self.stubs.len())]
    }

    /// Adds a node linked to `m` distinct existing nodes, each drawn in
    /// proportion to degree among those not yet chosen.
    pub fn grow_one<R: Rng + ?Sized>(&mut self, m: usize, rng: &mut R) -> usize {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = self.draw(rng);
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        let node = self.graph.add_node();
        for t in targets {
            self.graph.add_edge(t, node).expect("fresh simple edge");
            self.stubs.extend([t, node]);
        }
        node
    }
}

/// Preferential attachment from a ring of `m0` nodes up to `target_n` nodes.
pub fn ba_grow<R: Rng + ?Sized>(m0: usize, m: usize, target_n: usize, rng: &mut R) -> Result<PopulationGraph, GrowthError> {
    if m0 < 3 || m == 0 || m >= m0 {
        return Err(GrowthError::InvalidAttachment { m0, m });
    }
    if target_n <= m0 {
        return Err(GrowthError::TargetTooSmall { target: target_n, seed: m0 });
    }
    let seed = PopulationGraph::ring(m0).expect("m0 >= 3");
    let mut edges = seed.edges();
    let mut stubs: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut targets = Vec::with_capacity(m);
    for node in m0..target_n {
        targets.clear();
        while targets.len() < m {
            let t = stubs[rng.gen_range(0..stubs.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, node));
            stubs.extend([t, node]);
        }
    }
    Ok(PopulationGraph::from_edges(target_n, &edges).expect("generated edges are simple"))
}

fn check_probability(p: f64) -> Result<(), GrowthError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GrowthError::InvalidProbability(p))
    }
}

/// One duplication step: copies a uniformly chosen node, drops each copied
/// link with probability `delta`, then links the duplicate to every other
/// node with probability `alpha_coeff / N` (N = size before the step).
/// Returns `(original, duplicate)`.
pub fn dd_step<R: Rng + ?Sized>(
    g: &mut PopulationGraph,
    delta: f64,
    alpha_coeff: f64,
    rng: &mut R,
) -> Result<(usize, usize), GrowthError> {
    check_probability(delta)?;
    let n = g.node_count();
    if n == 0 {
        return Err(GrowthError::TooFewNodes(1));
    }
    let alpha = alpha_coeff / n as f64;
    check_probability(alpha)?;
    let original = rng.gen_range(0..n);
    let mut links: Vec<usize> = g.neighbors(original).iter().copied().filter(|_| rng.gen::<f64>() >= delta).collect();
    let inherited = links.len();
    for v in 0..n {
        if links[..inherited].binary_search(&v).is_err() && rng.gen::<f64>() < alpha {
            links.push(v);
        }
    }
    let dup = g.add_node();
    for v in links {
        g.add_edge(v, dup).expect("duplicate links are simple");
    }
    Ok((original, dup))
}

/// Duplication-divergence growth from `seed` to `target_n` nodes.
pub fn dd_grow<R: Rng + ?Sized>(
    seed: &PopulationGraph,
    delta: f64,
    alpha_coeff: f64,
    target_n: usize,
    rng: &mut R,
) -> Result<PopulationGraph, GrowthError> {
    check_probability(delta)?;
    if seed.node_count() == 0 {
        return Err(GrowthError::TooFewNodes(1));
    }
    if target_n <= seed.node_count() {
        return Err(GrowthError::TargetTooSmall { target: target_n, seed: seed.node_count() });
    }
    let mut g = seed.clone();
    while g.node_count() < target_n {
        dd_step(&mut g, delta, alpha_coeff, rng)?;
    }
    Ok(g)
}

/// Expected degree of a duplicate of a node with degree `k` in a graph of
/// `n` nodes.
pub fn dd_expected_degree(k: usize, n: usize, delta: f64, alpha_coeff: f64) -> f64 {
    let alpha = alpha_coeff / n as f64;
    let kept = k as f64 * (1.0 - delta);
    kept + alpha * (n as f64 - kept)
}

/// Draw from `rho` on `[0, x_max]`; the exponential is truncated by rejection.
pub fn sample_fitness<R: Rng + ?Sized>(rho: FitnessDistribution, x_max: f64, rng: &mut R) -> f64 {
    match rho {
        FitnessDistribution::Uniform => rng.gen::<f64>() * x_max,
        FitnessDistribution::Exponential => loop {
            let x = -(1.0 - rng.gen::<f64>()).ln();
            if x <= x_max {
                return x;
            }
        },
    }
}

/// Fixed-size fitness graph: each unordered pair links with probability
/// `x_i x_j / x_max^2`. Returns the graph and the fitness values.
pub fn fitness_model_generate<R: Rng + ?Sized>(
    n: usize,
    rho: FitnessDistribution,
    x_max: f64,
    rng: &mut R,
) -> Result<(PopulationGraph, Vec<f64>), GrowthError> {
    if x_max.is_nan() || x_max <= 0.0 {
        return Err(GrowthError::InvalidMaximum(x_max));
    }
    let x: Vec<f64> = (0..n).map(|_| sample_fitness(rho, x_max, rng)).collect();
    let g = fitness_graph_from_values(&x, x_max, rng)?;
    Ok((g, x))
}

pub fn fitness_graph_from_values<R: Rng + ?Sized>(x: &[f64], x_max: f64, rng: &mut R) -> Result<PopulationGraph, GrowthError> {
    if x.len() < 2 {
        return Err(GrowthError::TooFewNodes(2));
    }
    if x_max.is_nan() || x_max <= 0.0 {
        return Err(GrowthError::InvalidMaximum(x_max));
    }
    if let Some(&bad) = x.iter().find(|v| !(0.0..=x_max).contains(*v)) {
        return Err(GrowthError::FitnessOutOfRange { value: bad, max: x_max });
    }
    let denom = x_max * x_max;
    let mut edges = Vec::new();
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if rng.gen::<f64>() < x[i] * x[j] / denom {
                edges.push((i, j));
            }
        }
    }
    Ok(PopulationGraph::from_edges(x.len(), &edges).expect("pairs are simple"))
}

/// Power-law exponent estimate from the log-log slope of the complementary
/// degree distribution, `gamma = 1 - slope`, using degrees `>= k_min` whose
/// tail holds at least `min_tail` nodes. `None` with fewer than two points.
pub fn tail_exponent(g: &PopulationGraph, k_min: usize, min_tail: usize) -> Option<f64> {
    let hist = crate::metrics::degree_histogram(g);
    let n = g.node_count() as f64;
    let mut tail: usize = hist.iter().sum();
    let mut points = Vec::new();
    for (k, &count) in hist.iter().enumerate() {
        if k >= k_min.max(1) && tail >= min_tail && count > 0 {
            points.push(((k as f64).ln(), (tail as f64 / n).ln()));
        }
        tail -= count;
    }
    crate::metrics::fit_line(&points).map(|f| 1.0 - f.slope)
}
