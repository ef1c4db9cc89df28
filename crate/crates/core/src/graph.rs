//! Undirected simple graph over a fixed set of nodes `0..n`.
//!
//! Each node keeps its neighbors in a sorted vector. Sorting keeps every
//! mutation exactly invertible (removing and re-adding an edge restores the
//! identical internal state) and makes the neighbor order, and therefore any
//! random walk, reproducible for a given random stream.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph needs at least {min} nodes, got {got}")]
    InvalidSize { min: usize, got: usize },
    #[error("node {node} out of range for a graph of {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(usize, usize),
    #[error("node {0} has no neighbors")]
    NoNeighbor(usize),
    #[error("graph is disconnected")]
    Disconnected,
}

/// Symmetric, loop-free adjacency over `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PopulationGraph {
    adj: Vec<Vec<usize>>,
    edges: usize,
}

impl PopulationGraph {
    /// `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], edges: 0 }
    }

    /// Cycle where node `i` links to `i - 1` and `i + 1` (mod `n`).
    pub fn ring(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::InvalidSize { min: 3, got: n });
        }
        let mut g = Self::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge(i, j).expect("fresh edge");
            }
        }
        g
    }

    /// Builds a graph from an edge list; duplicates and loops are errors.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    fn check(&self, node: usize) -> Result<(), GraphError> {
        if node < self.adj.len() {
            Ok(())
        } else {
            Err(GraphError::InvalidNode { node, n: self.adj.len() })
        }
    }

    pub fn degree(&self, node: usize) -> Result<usize, GraphError> {
        self.check(node)?;
        Ok(self.adj[node].len())
    }

    /// Degree without bounds reporting; panics on an out-of-range node.
    #[inline]
    pub fn deg(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    /// Sorted neighbor list. Panics on an out-of-range node.
    #[inline]
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    #[inline]
    /// Appends an isolated node and returns its index.
    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.adj.len() && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let pos_a = match self.adj[a].binary_search(&b) {
            Ok(_) => return Err(GraphError::DuplicateEdge(a, b)),
            Err(p) => p,
        };
        let pos_b = self.adj[b].binary_search(&a).unwrap_err();
        self.adj[a].insert(pos_a, b);
        self.adj[b].insert(pos_b, a);
        self.edges += 1;
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let pos_a = self.adj[a].binary_search(&b).map_err(|_| GraphError::MissingEdge(a, b))?;
        let pos_b = self.adj[b].binary_search(&a).expect("symmetric adjacency");
        self.adj[a].remove(pos_a);
        self.adj[b].remove(pos_b);
        self.edges -= 1;
        Ok(())
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edges);
        for (a, nbrs) in self.adj.iter().enumerate() {
            out.extend(nbrs.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// Sum of `weight(j, k)` over unordered neighbor pairs `{j, k}` of
    /// `node` that are themselves linked, i.e. over the triangles at `node`.
    pub fn closed_pair_weight(&self, node: usize, mut weight: impl FnMut(usize, usize) -> f64) -> f64 {
        let nbrs = &self.adj[node];
        let mut total = 0.0;
        for (a, &j) in nbrs.iter().enumerate() {
            let nj = &self.adj[j];
            for &k in &nbrs[a + 1..] {
                if nj.binary_search(&k).is_ok() {
                    total += weight(j, k);
                }
            }
        }
        total
    }

    /// Uniform neighbor of `node`.
    pub fn random_neighbor<R: Rng + ?Sized>(&self, node: usize, rng: &mut R) -> Result<usize, GraphError> {
        self.check(node)?;
        let nbrs = &self.adj[node];
        if nbrs.is_empty() {
            return Err(GraphError::NoNeighbor(node));
        }
        Ok(nbrs[rng.gen_range(0..nbrs.len())])
    }

    /// Two uniform neighbor hops from `start`, returned as `(mid, end)`.
    /// `end` may equal `start`; callers filter.
    pub fn two_step_walk<R: Rng + ?Sized>(&self, start: usize, rng: &mut R) -> Result<(usize, usize), GraphError> {
        let mid = self.random_neighbor(start, rng)?;
        let end = self.random_neighbor(mid, rng)?;
        Ok((mid, end))
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u] + 1;
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = du;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        self.bfs_distances(0).iter().all(|&d| d != usize::MAX)
    }

    /// Connected components as sorted node lists, largest first
    /// (ties by smallest member).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        comps
    }

    /// Induced subgraph on the largest component, nodes relabeled in
    /// ascending order of their original index.
    pub fn largest_component(&self) -> PopulationGraph {
        let comps = self.components();
        let Some(nodes) = comps.first() else {
            return Self::empty(0);
        };
        let mut index = vec![usize::MAX; self.adj.len()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let mut g = Self::empty(nodes.len());
        for (a, b) in self.edges() {
            if index[a] != usize::MAX && index[b] != usize::MAX {
                g.add_edge(index[a], index[b]).expect("induced edge");
            }
        }
        g
    }

    /// Plain DOT rendering: `graph name { a -- b; ... }`. Isolated nodes
    /// are listed on their own so the node count survives a round trip.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {name} {{");
        for (i, nbrs) in self.adj.iter().enumerate() {
            if nbrs.is_empty() {
                let _ = writeln!(out, "  {i};");
            }
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }

    /// Parses the subset of DOT produced by [`PopulationGraph::to_dot`].
    /// The node count is one more than the largest node id seen.
    pub fn from_dot(text: &str) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut max_node: Option<usize> = None;
        let bump = |v: usize, m: &mut Option<usize>| *m = Some(m.map_or(v, |x| x.max(v)));
        for raw in text.lines() {
            let line = raw.trim().trim_end_matches(';').trim();
            if line.is_empty() || line.starts_with("graph") || line == "}" {
                continue;
            }
            if let Some((a, b)) = line.split_once("--") {
                let (Ok(a), Ok(b)) = (a.trim().parse::<usize>(), b.trim().parse::<usize>()) else {
                    continue;
                };
                bump(a, &mut max_node);
                bump(b, &mut max_node);
                edges.push((a, b));
            } else if let Ok(v) = line.parse::<usize>() {
                bump(v, &mut max_node);
            }
        }
        Self::from_edges(max_node.map_or(0, |m| m + 1), &edges)
    }
}
