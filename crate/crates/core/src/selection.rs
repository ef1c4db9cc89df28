//! Fitness comparison under constraints and selection schemes.
//!
//! Constrained problems are ranked with stochastic ranking: a bubble sort
//! whose adjacent comparisons use the objective when both individuals are
//! feasible (or with probability `p_f`), and the summed constraint
//! violation otherwise.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problems::Evaluation;
use crate::scalar::Scalar;
use crate::topology::RankTable;

/// Probability of comparing infeasible pairs by objective.
pub const DEFAULT_PF: f64 = 0.45;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("cannot select from an empty pool")]
    EmptyPool,
    #[error("truncation of {count} from a pool of {pool}")]
    TooMany { count: usize, pool: usize },
    #[error("p_f = {0} outside [0, 0.5)")]
    InvalidPf(f64),
}

/// Anything with a minimization cost and a summed violation.
pub trait Scored {
    fn cost_f64(&self) -> f64;
    fn penalty_f64(&self) -> f64;
}

impl<T: Scalar> Scored for Evaluation<T> {
    #[inline]
    fn cost_f64(&self) -> f64 {
        self.cost().as_f64()
    }

    #[inline]
    fn penalty_f64(&self) -> f64 {
        self.penalty().as_f64()
    }
}

impl<S: Scored + ?Sized> Scored for &S {
    fn cost_f64(&self) -> f64 {
        (**self).cost_f64()
    }

    fn penalty_f64(&self) -> f64 {
        (**self).penalty_f64()
    }
}

#[inline]
fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}

/// Deterministic order: feasible first, feasible by cost, infeasible by
/// violation.
pub fn feasibility_order<S: Scored + ?Sized>(a: &S, b: &S) -> Ordering {
    let (pa, pb) = (a.penalty_f64(), b.penalty_f64());
    match (pa == 0.0, pb == 0.0) {
        (true, true) => cmp_f64(a.cost_f64(), b.cost_f64()),
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => cmp_f64(pa, pb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FitnessComparator {
    Unconstrained,
    StochasticRanking { pf: f64 },
}

impl FitnessComparator {
    pub fn stochastic(pf: f64) -> Result<Self, SelectionError> {
        if !(0.0..0.5).contains(&pf) {
            return Err(SelectionError::InvalidPf(pf));
        }
        Ok(FitnessComparator::StochasticRanking { pf })
    }

    /// Stochastic ranking at `DEFAULT_PF` for constrained problems, plain
    /// cost comparison otherwise.
    pub fn for_problem(constrained: bool) -> Self {
        if constrained {
            FitnessComparator::StochasticRanking { pf: DEFAULT_PF }
        } else {
            FitnessComparator::Unconstrained
        }
    }

    /// One stochastic-ranking comparison: true when `a` should sit ahead of `b`.
    /// Consumes one uniform draw per call for constrained comparators.
    #[inline]
    pub fn precedes<S: Scored + ?Sized, R: Rng + ?Sized>(&self, a: &S, b: &S, rng: &mut R) -> bool {
        match *self {
            FitnessComparator::Unconstrained => a.cost_f64() < b.cost_f64(),
            FitnessComparator::StochasticRanking { pf } => {
                let u: f64 = rng.gen();
                let (pa, pb) = (a.penalty_f64(), b.penalty_f64());
                if (pa == 0.0 && pb == 0.0) || u < pf {
                    a.cost_f64() < b.cost_f64()
                } else {
                    pa < pb
                }
            }
        }
    }

    /// Survivor test between a challenger and an incumbent: the challenger
    /// wins unless the incumbent strictly precedes it.
    #[inline]
    pub fn challenger_wins<S: Scored + ?Sized, R: Rng + ?Sized>(&self, challenger: &S, incumbent: &S, rng: &mut R) -> bool {
        !self.precedes(incumbent, challenger, rng)
    }

    /// Indices of `pop` ordered best first.
    pub fn order<S: Scored, R: Rng + ?Sized>(&self, pop: &[S], rng: &mut R) -> Vec<usize> {
        match *self {
            FitnessComparator::Unconstrained => {
                let mut idx: Vec<usize> = (0..pop.len()).collect();
                idx.sort_by(|&a, &b| cmp_f64(pop[a].cost_f64(), pop[b].cost_f64()));
                idx
            }
            FitnessComparator::StochasticRanking { pf } => stochastic_rank_sort(pop, pf, rng),
        }
    }
}

/// Stochastic ranking bubble sort over `pop`: at most `pop.len()` sweeps,
/// stopping after the first sweep without a swap. Returns indices best first.
pub fn stochastic_rank_sort<S: Scored, R: Rng + ?Sized>(pop: &[S], pf: f64, rng: &mut R) -> Vec<usize> {
    let n = pop.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let cost: Vec<f64> = pop.iter().map(Scored::cost_f64).collect();
    let pen: Vec<f64> = pop.iter().map(Scored::penalty_f64).collect();
    for _ in 0..n {
        let mut swapped = false;
        for j in 0..n.saturating_sub(1) {
            let (a, b) = (idx[j], idx[j + 1]);
            let u: f64 = rng.gen();
            let swap = if (pen[a] == 0.0 && pen[b] == 0.0) || u < pf { cost[a] > cost[b] } else { pen[a] > pen[b] };
            if swap {
                idx.swap(j, j + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    idx
}

/// Ranks 1..=n under the comparator; ties keep the lower index ahead.
pub fn assign_ranks<S: Scored, R: Rng + ?Sized>(pop: &[S], comparator: &FitnessComparator, rng: &mut R) -> RankTable {
    RankTable::from_order(&comparator.order(pop, rng)).expect("order is a permutation")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScheme {
    BinaryTournament,
    Truncation,
    LinearRanking,
    UniformRandom,
}

/// Selects `count` members from `ranked` (best first).
///
/// Tournament: each pick is the better of two distinct members drawn at
/// random. Truncation: the first `count`. Linear ranking: member at
/// position `p` (0-based) drawn with weight `len - p`.
pub fn select<I: Copy, R: Rng + ?Sized>(
    scheme: SelectionScheme,
    ranked: &[I],
    count: usize,
    rng: &mut R,
) -> Result<Vec<I>, SelectionError> {
    let n = ranked.len();
    if n == 0 {
        return Err(SelectionError::EmptyPool);
    }
    Ok(match scheme {
        SelectionScheme::Truncation => {
            if count > n {
                return Err(SelectionError::TooMany { count, pool: n });
            }
            ranked[..count].to_vec()
        }
        SelectionScheme::BinaryTournament => (0..count).map(|_| ranked[tournament_position(n, rng)]).collect(),
        SelectionScheme::LinearRanking => (0..count).map(|_| ranked[linear_rank_position(n, rng)]).collect(),
        SelectionScheme::UniformRandom => (0..count).map(|_| ranked[rng.gen_range(0..n)]).collect(),
    })
}

/// Position of the winner of one binary tournament over `n` ranked members.
#[inline]
pub fn tournament_position<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    if n == 1 {
        return 0;
    }
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    a.min(b)
}

/// Position drawn with probability `(n - p) / (n (n + 1) / 2)`.
#[inline]
pub fn linear_rank_position<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    let total = n * (n + 1) / 2;
    let mut ticket = rng.gen_range(0..total);
    for p in 0..n {
        let w = n - p;
        if ticket < w {
            return p;
        }
        ticket -= w;
    }
    n - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Sense;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[derive(Debug, Clone, Copy)]
    struct Pt(f64, f64);

    impl Scored for Pt {
        fn cost_f64(&self) -> f64 {
            self.0
        }
        fn penalty_f64(&self) -> f64 {
            self.1
        }
    }

    fn oracle_order(pop: &[Pt]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..pop.len()).collect();
        idx.sort_by(|&a, &b| {
            let (x, y) = (pop[a], pop[b]);
            let kx = (x.1 > 0.0, if x.1 > 0.0 { x.1 } else { x.0 });
            let ky = (y.1 > 0.0, if y.1 > 0.0 { y.1 } else { y.0 });
            kx.partial_cmp(&ky).unwrap()
        });
        idx
    }

    #[test]
    fn all_feasible_is_objective_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = [Pt(3.0, 0.0), Pt(1.0, 0.0), Pt(2.0, 0.0), Pt(0.5, 0.0)];
        assert_eq!(stochastic_rank_sort(&pop, 0.45, &mut rng), vec![3, 1, 2, 0]);
    }

    #[test]
    fn pf_zero_puts_infeasible_behind() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pop = [Pt(-100.0, 1.0), Pt(5.0, 0.0), Pt(1.0, 0.0), Pt(-50.0, 0.5)];
        assert_eq!(stochastic_rank_sort(&pop, 0.0, &mut rng), vec![2, 1, 3, 0]);
    }

    #[test]
    fn single_pair_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pop = [Pt(1.0, 0.0), Pt(0.0, 5.0)];
        let n = 100_000;
        let b_first = (0..n).filter(|_| stochastic_rank_sort(&pop, 0.45, &mut rng)[0] == 1).count() as f64;
        // two sweeps at most: the first must swap B ahead by objective and the
        // second must keep it there, again by objective
        let p = 0.45 * 0.45;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((b_first - p * n as f64).abs() < 3.0 * sigma, "{b_first}");
    }

    #[test]
    fn rank_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pop: Vec<Evaluation<f64>> =
            [3.0, 1.0, 2.0].iter().map(|&f| Evaluation::unconstrained(f, Sense::Minimize)).collect();
        let r = assign_ranks(&pop, &FitnessComparator::Unconstrained, &mut rng);
        assert_eq!(r.as_slice(), &[3, 1, 2]);
        let flat: Vec<Evaluation<f64>> = (0..5).map(|_| Evaluation::unconstrained(1.0, Sense::Minimize)).collect();
        let r = assign_ranks(&flat, &FitnessComparator::Unconstrained, &mut rng);
        assert_eq!(r.as_slice(), &[1, 2, 3, 4, 5]);
        let r = assign_ranks(&flat, &FitnessComparator::StochasticRanking { pf: 0.45 }, &mut rng);
        assert_eq!(r.as_slice(), &[1, 2, 3, 4, 5]);
        let maxi: Vec<Evaluation<f64>> =
            [3.0, 1.0, 2.0].iter().map(|&f| Evaluation::unconstrained(f, Sense::Maximize)).collect();
        assert_eq!(assign_ranks(&maxi, &FitnessComparator::Unconstrained, &mut rng).as_slice(), &[1, 3, 2]);
    }

    #[test]
    fn stochastic_ranks_repeat_with_seed() {
        let pop: Vec<Pt> = (0..30).map(|i| Pt((i * 7 % 11) as f64, (i % 3) as f64)).collect();
        let cmp = FitnessComparator::StochasticRanking { pf: 0.45 };
        let a = assign_ranks(&pop, &cmp, &mut ChaCha8Rng::seed_from_u64(9));
        let b = assign_ranks(&pop, &cmp, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn select_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pool = [10, 20, 30];
        assert_eq!(select(SelectionScheme::Truncation, &pool, 3, &mut rng).unwrap(), vec![10, 20, 30]);
        assert_eq!(select(SelectionScheme::Truncation, &pool, 4, &mut rng), Err(SelectionError::TooMany { count: 4, pool: 3 }));
        assert_eq!(select(SelectionScheme::BinaryTournament, &[7], 3, &mut rng).unwrap(), vec![7, 7, 7]);
        let empty: [u8; 0] = [];
        assert_eq!(select(SelectionScheme::LinearRanking, &empty, 1, &mut rng), Err(SelectionError::EmptyPool));
        assert!(FitnessComparator::stochastic(0.5).is_err());
    }

    #[test]
    fn tournament_never_picks_worst_of_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!((0..1000).all(|_| tournament_position(2, &mut rng) == 0));
    }

    #[test]
    fn linear_ranking_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        for n in 2..=10 {
            let mut counts = vec![0usize; n];
            for _ in 0..draws {
                counts[linear_rank_position(n, &mut rng)] += 1;
            }
            let total = (n * (n + 1) / 2) as f64;
            for (p, &c) in counts.iter().enumerate() {
                let prob = (n - p) as f64 / total;
                let sigma = (draws as f64 * prob * (1.0 - prob)).sqrt();
                assert!((c as f64 - draws as f64 * prob).abs() < 3.5 * sigma, "n={n} p={p} c={c}");
            }
        }
    }

    proptest! {
        #[test]
        fn pf_zero_matches_deterministic_oracle(
            pts in prop::collection::vec((-50i32..50, prop_oneof![Just(0i32), 1i32..20]), 1..40),
            seed in any::<u64>(),
        ) {
            let pop: Vec<Pt> = pts.iter().map(|&(c, p)| Pt(c as f64, p as f64)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            prop_assert_eq!(stochastic_rank_sort(&pop, 0.0, &mut rng), oracle_order(&pop));
        }

        #[test]
        fn ranks_are_permutations(
            pts in prop::collection::vec((-50.0f64..50.0, 0.0f64..3.0), 1..60),
            seed in any::<u64>(),
        ) {
            let pop: Vec<Pt> = pts.iter().map(|&(c, p)| Pt(c, if p < 1.5 { 0.0 } else { p })).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = assign_ranks(&pop, &FitnessComparator::StochasticRanking { pf: 0.45 }, &mut rng);
            let mut sorted = r.as_slice().to_vec();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (1..=pop.len()).collect::<Vec<_>>());
        }
    }
}
