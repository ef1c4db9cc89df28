use rand::Rng;

use super::{finish, Ctx, EngineError, Individual, RunRecord, Snapshot, Tracker};
use crate::graph::PopulationGraph;
use crate::scalar::Scalar;
use crate::selection::{assign_ranks, linear_rank_position};
use crate::variation::{create_offspring, OperatorSet, Parents};

/// Nodes within ring distance `1..=radius` of `node`, excluding `node`.
pub fn ring_neighborhood(n: usize, node: usize, radius: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=radius.min(n / 2))
        .flat_map(|d| [(node + d) % n, (node + n - d) % n])
        .filter(|&v| v != node)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

pub(super) fn run<T: Scalar, R: Rng + ?Sized>(ctx: &Ctx<'_>, radius: usize, rng: &mut R) -> Result<RunRecord<T>, EngineError> {
    let n = ctx.cfg.pop_size;
    let neighborhoods: Vec<Vec<usize>> = (0..n).map(|i| ring_neighborhood(n, i, radius)).collect();
    // interaction graph: every node linked to its whole neighborhood
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|i| neighborhoods[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j))).collect();
    let g = PopulationGraph::from_edges(n, &edges)?;
    let panmictic = neighborhoods[0].len() == n - 1;
    let mut tracker = Tracker::new(ctx.cfg.max_evals);
    let mut pop: Vec<Individual<T>> = ctx.initial_population(&mut tracker, rng);
    tracker.record(0);
    let mut snapshots = Vec::new();
    let mut generation = 0;
    let mut hood = Vec::with_capacity(n);

    while !tracker.exhausted() && pop.len() == n && ctx.generation_allowed(generation + 1) {
        generation += 1;
        let ranks = assign_ranks(&pop, &ctx.comparator, rng);
        let mut next = pop.clone();
        for n1 in 0..n {
            if tracker.exhausted() {
                break;
            }
            // neighborhood ordered best first by the generation's ranks
            hood.clear();
            hood.extend_from_slice(&neighborhoods[n1]);
            hood.sort_unstable_by_key(|&v| ranks.rank(v));
            let n2 = hood[linear_rank_position(hood.len(), rng)];
            let op = OperatorSet::Seven.pick(rng);
            let donor = if op.needs_donor() { Some(hood[linear_rank_position(hood.len(), rng)]) } else { None };
            let parents = Parents {
                first: &pop[n1].genome,
                second: &pop[n2].genome,
                donor: donor.map(|d| pop[d].genome.as_slice()),
                first_is_better: ranks.rank(n1) < ranks.rank(n2),
            };
            let genome = create_offspring(op, &parents, &ctx.domain, rng)?;
            let child = tracker.evaluate(ctx.problem, genome);
            if ctx.comparator.challenger_wins(&child, &pop[n1], rng) {
                next[n1] = child;
            } else {
                next[n1].age += 1;
            }
        }
        pop = next;
        tracker.record(generation);
        if ctx.wants_snapshot(generation) {
            snapshots.push(Snapshot { generation, graph: g.clone() });
        }
    }
    Ok(finish(ctx.cfg, ctx.problem, tracker, snapshots, generation, panmictic))
}
