//! Fitness- and clustering-driven rewiring of the population graph.
//!
//! Each node has a rank-dependent target degree (`degree_set_point`) and a
//! rank-weighted clustering coefficient (`weighted_clustering`). Three local
//! rules driven by two-step random walks move the graph toward both: add a
//! link between two nodes that want more links, remove a link between two
//! nodes that have too many, and move a link when doing so raises the
//! weighted clustering of the three nodes involved.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::PopulationGraph;

/// Walks tried per rule per node before the rule gives up.
pub const RULE_ATTEMPTS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("rank {rank} outside 1..={n}")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("ranks are not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("set point bounds require {k_min} <= k_max = {k_max}")]
    InvalidPolicy { k_min: usize, k_max: usize },
    #[error("rank table has {ranks} entries but the graph has {nodes} nodes")]
    SizeMismatch { ranks: usize, nodes: usize },
}

/// Rank of every node, 1 = best, `n` = worst.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    ranks: Vec<usize>,
}

impl RankTable {
    pub fn new(ranks: Vec<usize>) -> Result<Self, TopologyError> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r > n || seen[r - 1] {
                return Err(TopologyError::NotAPermutation(n));
            }
            seen[r - 1] = true;
        }
        Ok(Self { ranks })
    }

    /// Ranks from an ordering of node ids, best first.
    pub fn from_order(order: &[usize]) -> Result<Self, TopologyError> {
        let mut ranks = vec![0; order.len()];
        for (pos, &node) in order.iter().enumerate() {
            if node >= order.len() {
                return Err(TopologyError::NotAPermutation(order.len()));
            }
            ranks[node] = pos + 1;
        }
        Self::new(ranks)
    }

    /// Rank equal to node index + 1.
    pub fn identity(n: usize) -> Self {
        Self { ranks: (1..=n).collect() }
    }

    /// Every node ranked `n`; handy for fixtures, not a valid permutation.
    #[doc(hidden)]
    pub fn all_worst(n: usize) -> Self {
        Self { ranks: vec![n; n] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    #[inline]
    pub fn rank(&self, node: usize) -> usize {
        self.ranks[node]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ranks
    }

    /// Node ids ordered best first.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.ranks.len()];
        for (node, &r) in self.ranks.iter().enumerate() {
            order[(r - 1).min(self.ranks.len() - 1)] = node;
        }
        order
    }
}

/// Bounds of the rank-dependent target degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetPointPolicy {
    pub k_min: usize,
    pub k_max: usize,
}

impl SetPointPolicy {
    pub const K_MIN: usize = 3;

    pub fn new(k_max: usize) -> Result<Self, TopologyError> {
        Self::with_bounds(Self::K_MIN, k_max)
    }

    pub fn with_bounds(k_min: usize, k_max: usize) -> Result<Self, TopologyError> {
        if k_min > k_max {
            return Err(TopologyError::InvalidPolicy { k_min, k_max });
        }
        Ok(Self { k_min, k_max })
    }

    /// `k_min + (k_max - k_min) * ((n - rank) / n)^2`
    pub fn set_point(&self, rank: usize, n: usize) -> Result<f64, TopologyError> {
        if rank == 0 || rank > n {
            return Err(TopologyError::RankOutOfRange { rank, n });
        }
        Ok(self.set_point_unchecked(rank, n))
    }

    #[inline]
    fn set_point_unchecked(&self, rank: usize, n: usize) -> f64 {
        let frac = (n - rank) as f64 / n as f64;
        self.k_min as f64 + (self.k_max - self.k_min) as f64 * frac * frac
    }
}

pub fn degree_set_point(policy: &SetPointPolicy, rank: usize, n: usize) -> Result<f64, TopologyError> {
    policy.set_point(rank, n)
}

/// `rank_j * rank_k / n^2`; worst pairs weigh 1.
#[inline]
pub fn clustering_weight(rank_j: usize, rank_k: usize, n: usize) -> f64 {
    (rank_j as f64 * rank_k as f64) / (n as f64 * n as f64)
}

/// Clustering coefficient of `node` with every closing link `j-k` weighted
/// by `clustering_weight(rank_j, rank_k)`. Nodes with fewer than two
/// neighbors score 0.
pub fn weighted_clustering(g: &PopulationGraph, ranks: &RankTable, node: usize) -> f64 {
    let k = g.deg(node);
    if k < 2 {
        return 0.0;
    }
    let n = ranks.len();
    let e = g.closed_pair_weight(node, |a, b| clustering_weight(ranks.rank(a), ranks.rank(b), n));
    2.0 * e / (k * (k - 1)) as f64
}

/// Rewiring context for one generation: graph ranks and set points are
/// fixed while nodes are processed in turn.
struct Rewirer<'a> {
    ranks: &'a RankTable,
    set_points: Vec<f64>,
}

impl<'a> Rewirer<'a> {
    fn new(ranks: &'a RankTable, policy: &SetPointPolicy) -> Self {
        let n = ranks.len();
        let set_points = ranks.as_slice().iter().map(|&r| policy.set_point_unchecked(r.clamp(1, n), n)).collect();
        Self { ranks, set_points }
    }

    #[inline]
    fn wants_more(&self, g: &PopulationGraph, node: usize) -> bool {
        (g.deg(node) as f64) < self.set_points[node]
    }

    #[inline]
    fn wants_fewer(&self, g: &PopulationGraph, node: usize) -> bool {
        (g.deg(node) as f64) > self.set_points[node]
    }

    fn triple_score(&self, g: &PopulationGraph, a: usize, b: usize, c: usize) -> f64 {
        weighted_clustering(g, self.ranks, a) + weighted_clustering(g, self.ranks, b) + weighted_clustering(g, self.ranks, c)
    }

    /// Triple score up to the common factor 2/n^2, as numerator and
    /// denominator. Ranks are integers, so this is exact.
    fn exact_triple(&self, g: &PopulationGraph, nodes: [usize; 3]) -> Option<(u128, u128)> {
        let mut num = 0u128;
        let mut den = 1u128;
        for node in nodes {
            let k = g.deg(node) as u128;
            if k < 2 {
                continue;
            }
            let s = g.closed_pair_weight(node, |a, b| (self.ranks.rank(a) * self.ranks.rank(b)) as f64) as u128;
            let d = k * (k - 1);
            num = num.checked_mul(d)?.checked_add(s.checked_mul(den)?)?;
            den = den.checked_mul(d)?;
        }
        Some((num, den))
    }

    /// Strict increase of the triple score. Exact when the fractions fit in
    /// u128, otherwise a relative margin keeps rounding noise from counting.
    fn raises(&self, before_exact: Option<(u128, u128)>, g: &PopulationGraph, nodes: [usize; 3], before: f64, after: f64) -> bool {
        let exact = before_exact.zip(self.exact_triple(g, nodes));
        if let Some(((p1, q1), (p2, q2))) = exact {
            if let (Some(l), Some(r)) = (p2.checked_mul(q1), p1.checked_mul(q2)) {
                return l > r;
            }
        }
        after > before * (1.0 + 1e-12)
    }

    fn add<R: Rng + ?Sized>(&self, g: &mut PopulationGraph, n1: usize, rng: &mut R) -> bool {
        if g.deg(n1) == 0 || !self.wants_more(g, n1) {
            return false;
        }
        for _ in 0..RULE_ATTEMPTS {
            let Ok((_, n3)) = g.two_step_walk(n1, rng) else { return false };
            if n3 != n1 && !g.has_edge(n1, n3) && self.wants_more(g, n3) {
                g.add_edge(n1, n3).expect("checked absent");
                return true;
            }
        }
        false
    }

    fn remove<R: Rng + ?Sized>(&self, g: &mut PopulationGraph, n1: usize, rng: &mut R) -> bool {
        if g.deg(n1) == 0 || !self.wants_fewer(g, n1) {
            return false;
        }
        for _ in 0..RULE_ATTEMPTS {
            let Ok((_, n3)) = g.two_step_walk(n1, rng) else { return false };
            // n2 stays linked to both ends, so the graph cannot split.
            if n3 != n1 && g.has_edge(n1, n3) && self.wants_fewer(g, n3) {
                g.remove_edge(n1, n3).expect("checked present");
                return true;
            }
        }
        false
    }

    fn transfer<R: Rng + ?Sized>(&self, g: &mut PopulationGraph, n1: usize, rng: &mut R) -> TransferOutcome {
        if g.deg(n1) == 0 {
            return TransferOutcome::NotAttempted;
        }
        let mut outcome = TransferOutcome::NotAttempted;
        // a transfer that fails to raise clustering counts as a failed attempt
        for _ in 0..RULE_ATTEMPTS {
            let Ok((n2, n3)) = g.two_step_walk(n1, rng) else { return outcome };
            if n3 == n1 || g.has_edge(n1, n3) || !self.wants_more(g, n3) {
                continue;
            }
            let before = self.triple_score(g, n1, n2, n3);
            let before_exact = self.exact_triple(g, [n1, n2, n3]);
            g.remove_edge(n1, n2).expect("walk edge");
            g.add_edge(n1, n3).expect("checked absent");
            let after = self.triple_score(g, n1, n2, n3);
            if self.raises(before_exact, g, [n1, n2, n3], before, after) {
                return TransferOutcome::Kept { n2, n3, before, after };
            }
            g.remove_edge(n1, n3).expect("just added");
            g.add_edge(n1, n2).expect("just removed");
            outcome = TransferOutcome::Reverted;
        }
        outcome
    }
}

/// What the transfer rule did for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransferOutcome {
    /// No walk met the preconditions.
    NotAttempted,
    /// The move did not strictly raise the weighted clustering and was undone.
    Reverted,
    Kept { n2: usize, n3: usize, before: f64, after: f64 },
}

impl TransferOutcome {
    pub fn kept(&self) -> bool {
        matches!(self, TransferOutcome::Kept { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub added: bool,
    pub removed: bool,
    pub transfer: TransferOutcome,
}

fn check_sizes(g: &PopulationGraph, ranks: &RankTable) -> Result<(), TopologyError> {
    if g.node_count() != ranks.len() {
        return Err(TopologyError::SizeMismatch { ranks: ranks.len(), nodes: g.node_count() });
    }
    Ok(())
}

/// Add link rule for `n1`: returns whether an edge was added.
pub fn add_link_rule<R: Rng + ?Sized>(
    g: &mut PopulationGraph,
    ranks: &RankTable,
    policy: &SetPointPolicy,
    n1: usize,
    rng: &mut R,
) -> Result<bool, TopologyError> {
    check_sizes(g, ranks)?;
    Ok(Rewirer::new(ranks, policy).add(g, n1, rng))
}

/// Remove link rule for `n1`: returns whether an edge was removed.
pub fn remove_link_rule<R: Rng + ?Sized>(
    g: &mut PopulationGraph,
    ranks: &RankTable,
    policy: &SetPointPolicy,
    n1: usize,
    rng: &mut R,
) -> Result<bool, TopologyError> {
    check_sizes(g, ranks)?;
    Ok(Rewirer::new(ranks, policy).remove(g, n1, rng))
}

/// Transfer link rule for `n1`.
pub fn transfer_link_rule<R: Rng + ?Sized>(
    g: &mut PopulationGraph,
    ranks: &RankTable,
    policy: &SetPointPolicy,
    n1: usize,
    rng: &mut R,
) -> Result<TransferOutcome, TopologyError> {
    check_sizes(g, ranks)?;
    Ok(Rewirer::new(ranks, policy).transfer(g, n1, rng))
}

/// Add, remove, then transfer for `n1`.
pub fn apply_topology_step<R: Rng + ?Sized>(
    g: &mut PopulationGraph,
    ranks: &RankTable,
    policy: &SetPointPolicy,
    n1: usize,
    rng: &mut R,
) -> Result<StepOutcome, TopologyError> {
    check_sizes(g, ranks)?;
    let rw = Rewirer::new(ranks, policy);
    Ok(rw.step(g, n1, rng))
}

impl Rewirer<'_> {
    fn step<R: Rng + ?Sized>(&self, g: &mut PopulationGraph, n1: usize, rng: &mut R) -> StepOutcome {
        let added = self.add(g, n1, rng);
        let removed = self.remove(g, n1, rng);
        let transfer = self.transfer(g, n1, rng);
        StepOutcome { added, removed, transfer }
    }
}

/// Per-generation rewiring driver that computes set points once and then
/// runs the three rules for one node at a time.
pub struct GenerationRewirer<'a> {
    inner: Rewirer<'a>,
}

impl<'a> GenerationRewirer<'a> {
    pub fn new(g: &PopulationGraph, ranks: &'a RankTable, policy: &SetPointPolicy) -> Result<Self, TopologyError> {
        check_sizes(g, ranks)?;
        Ok(Self { inner: Rewirer::new(ranks, policy) })
    }

    pub fn step<R: Rng + ?Sized>(&self, g: &mut PopulationGraph, n1: usize, rng: &mut R) -> StepOutcome {
        self.inner.step(g, n1, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn set_point_examples() {
        let p = SetPointPolicy::new(9).unwrap();
        assert_eq!(p.set_point(50, 50).unwrap(), 3.0);
        assert!((p.set_point(1, 50).unwrap() - 8.7624).abs() < 1e-12);
        let flat = SetPointPolicy::new(3).unwrap();
        assert!((1..=50).all(|r| flat.set_point(r, 50).unwrap() == 3.0));
        assert_eq!(p.set_point(0, 50), Err(TopologyError::RankOutOfRange { rank: 0, n: 50 }));
        assert_eq!(p.set_point(51, 50), Err(TopologyError::RankOutOfRange { rank: 51, n: 50 }));
        assert!(SetPointPolicy::new(2).is_err());
    }

    #[test]
    fn set_point_monotone_and_bounded() {
        for k_max in [3, 5, 7, 9] {
            let p = SetPointPolicy::new(k_max).unwrap();
            let mut prev = f64::INFINITY;
            for r in 1..=50 {
                let s = p.set_point(r, 50).unwrap();
                assert!(s <= prev && s >= 3.0 && s <= k_max as f64);
                prev = s;
            }
        }
    }

    #[test]
    fn weight_examples() {
        assert_eq!(clustering_weight(50, 50, 50), 1.0);
        assert!((clustering_weight(1, 1, 50) - 4e-4).abs() < 1e-15);
        assert!((clustering_weight(25, 50, 50) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equal_triple_scores_are_not_a_rise() {
        let g = PopulationGraph::ring(6).unwrap();
        let ranks = RankTable::identity(6);
        let rw = Rewirer::new(&ranks, &SetPointPolicy::new(5).unwrap());
        let nodes = [0, 1, 2];
        let exact = rw.exact_triple(&g, nodes);
        let s = rw.triple_score(&g, 0, 1, 2);
        assert!(!rw.raises(exact, &g, nodes, s, s + f64::EPSILON));
        assert!(!rw.raises(None, &g, nodes, 0.0574, 0.05740000000000001));
        assert!(rw.raises(None, &g, nodes, 0.0574, 0.0575));
    }

    #[test]
    fn weighted_clustering_examples() {
        let tri = PopulationGraph::ring(3).unwrap();
        let worst = RankTable::all_worst(3);
        assert!((0..3).all(|i| weighted_clustering(&tri, &worst, i) == 1.0));
        let ring5 = PopulationGraph::ring(5).unwrap();
        assert!((0..5).all(|i| weighted_clustering(&ring5, &RankTable::identity(5), i) == 0.0));
        // Triangle {0,1,2} inside a 50-node population; neighbors of 0 rank 25 and 50.
        let mut g = PopulationGraph::empty(50);
        g.add_edge(0, 1).unwrap();
        g.add_edge(0, 2).unwrap();
        g.add_edge(1, 2).unwrap();
        let mut ranks: Vec<usize> = (1..=50).collect();
        ranks.swap(1, 24); // node 1 -> rank 25
        ranks.swap(2, 49); // node 2 -> rank 50
        let ranks = RankTable::new(ranks).unwrap();
        assert_eq!(ranks.rank(1), 25);
        assert_eq!(ranks.rank(2), 50);
        assert!((weighted_clustering(&g, &ranks, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_table_validation() {
        assert!(RankTable::new(vec![1, 2, 2]).is_err());
        assert!(RankTable::new(vec![1, 3, 4]).is_err());
        let t = RankTable::from_order(&[2, 0, 1]).unwrap();
        assert_eq!(t.as_slice(), &[2, 3, 1]);
        assert_eq!(t.order(), vec![2, 0, 1]);
    }

    #[test]
    fn add_rule_on_fresh_ring_adds_chord() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SetPointPolicy::new(9).unwrap();
        let ranks = RankTable::identity(50);
        let mut g = PopulationGraph::ring(50).unwrap();
        // walk ends at distance 2 with probability 1/2 per attempt
        assert!(add_link_rule(&mut g, &ranks, &p, 0, &mut rng).unwrap());
        assert_eq!(g.deg(0), 3);
        assert!(g.has_edge(0, 2) || g.has_edge(0, 48));
    }

    #[test]
    fn add_rule_blocked_when_degree_at_set_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = SetPointPolicy::new(9).unwrap();
        let mut g = PopulationGraph::ring(50).unwrap();
        g.add_edge(0, 2).unwrap();
        // node 0 worst => set point 3, degree 3
        let mut order: Vec<usize> = (1..50).collect();
        order.push(0);
        let ranks = RankTable::from_order(&order).unwrap();
        let before = g.clone();
        for _ in 0..50 {
            assert!(!add_link_rule(&mut g, &ranks, &p, 0, &mut rng).unwrap());
        }
        assert_eq!(g, before);
    }

    #[test]
    fn triangle_never_rewires() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = SetPointPolicy::new(9).unwrap();
        let ranks = RankTable::identity(3);
        let mut g = PopulationGraph::ring(3).unwrap();
        for n1 in 0..3 {
            assert!(!add_link_rule(&mut g, &ranks, &p, n1, &mut rng).unwrap());
            assert!(!remove_link_rule(&mut g, &ranks, &p, n1, &mut rng).unwrap());
        }
        assert_eq!(g, PopulationGraph::ring(3).unwrap());
    }

    #[test]
    fn remove_rule_on_k5() {
        let p = SetPointPolicy::new(3).unwrap();
        let ranks = RankTable::identity(5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut applied = 0;
        for _ in 0..200 {
            let mut g = PopulationGraph::complete(5);
            if remove_link_rule(&mut g, &ranks, &p, 0, &mut rng).unwrap() {
                applied += 1;
                assert_eq!(g.deg(0), 3);
                assert_eq!(g.edge_count(), 9);
                assert!(g.is_connected());
                assert_eq!(g.degrees().iter().filter(|&&k| k == 3).count(), 2);
            }
        }
        // every walk on K5 ends adjacent to n1 with prob 3/4, so 10 attempts
        // all failing has probability 4^-10
        assert_eq!(applied, 200);
    }

    #[test]
    fn remove_rule_never_on_ring() {
        let p = SetPointPolicy::new(9).unwrap();
        let ranks = RankTable::identity(50);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = PopulationGraph::ring(50).unwrap();
        for n1 in 0..50 {
            assert!(!remove_link_rule(&mut g, &ranks, &p, n1, &mut rng).unwrap());
        }
    }

    #[test]
    fn transfer_never_kept_on_ring5() {
        let p = SetPointPolicy::new(9).unwrap();
        let ranks = RankTable::identity(5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ring = PopulationGraph::ring(5).unwrap();
        let mut g = ring.clone();
        for _ in 0..100 {
            for n1 in 0..5 {
                let out = transfer_link_rule(&mut g, &ranks, &p, n1, &mut rng).unwrap();
                assert!(!out.kept());
                assert_eq!(g, ring);
            }
        }
    }

    #[test]
    fn fresh_ring_step_only_adds() {
        let p = SetPointPolicy::new(9).unwrap();
        let ranks = RankTable::identity(50);
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = PopulationGraph::ring(50).unwrap();
            let out = apply_topology_step(&mut g, &ranks, &p, 7, &mut rng).unwrap();
            assert!(!out.removed);
            assert!(!out.transfer.kept());
            assert_eq!(g.edge_count(), 50 + usize::from(out.added));
        }
    }

    #[test]
    fn step_is_deterministic() {
        let p = SetPointPolicy::new(7).unwrap();
        let ranks = RankTable::identity(30);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = PopulationGraph::ring(30).unwrap();
            for _ in 0..20 {
                for n1 in 0..30 {
                    apply_topology_step(&mut g, &ranks, &p, n1, &mut rng).unwrap();
                }
            }
            g
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn regular_graph_at_set_point_without_gain_is_untouched() {
        // Petersen graph: 3-regular, girth 5, so no transfer can close a triangle.
        let edges = [
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
            (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
            (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
        ];
        let petersen = PopulationGraph::from_edges(10, &edges).unwrap();
        let p = SetPointPolicy::new(3).unwrap();
        let ranks = RankTable::identity(10);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut g = petersen.clone();
        for n1 in 0..10 {
            let out = apply_topology_step(&mut g, &ranks, &p, n1, &mut rng).unwrap();
            assert!(!out.added && !out.removed && !out.transfer.kept());
        }
        assert_eq!(g, petersen);
    }

    #[test]
    fn size_mismatch_rejected() {
        let p = SetPointPolicy::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut g = PopulationGraph::ring(5).unwrap();
        let err = apply_topology_step(&mut g, &RankTable::identity(4), &p, 0, &mut rng).unwrap_err();
        assert_eq!(err, TopologyError::SizeMismatch { ranks: 4, nodes: 5 });
    }
}
