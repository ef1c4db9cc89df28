use rand::Rng;

use super::{finish, Ctx, EngineError, Individual, RunRecord, Snapshot, Tracker, PARTNER_REDRAWS};
use crate::graph::PopulationGraph;
use crate::scalar::Scalar;
use crate::selection::assign_ranks;
use crate::topology::{GenerationRewirer, SetPointPolicy};
use crate::variation::{OperatorSet, Parents};

/// Mating partner for `n1`: end of a two-step walk, redrawn when the walk
/// comes back to `n1`, falling back to the last walk's midpoint.
pub(crate) fn walk_partner<R: Rng + ?Sized>(g: &PopulationGraph, n1: usize, rng: &mut R) -> Result<usize, EngineError> {
    let mut mid = n1;
    for _ in 0..=PARTNER_REDRAWS {
        let (m, end) = g.two_step_walk(n1, rng)?;
        if end != n1 {
            return Ok(end);
        }
        mid = m;
    }
    Ok(mid)
}

pub(super) fn run<T: Scalar, R: Rng + ?Sized>(ctx: &Ctx<'_>, k_max: usize, rng: &mut R) -> Result<RunRecord<T>, EngineError> {
    let n = ctx.cfg.pop_size;
    let policy = SetPointPolicy::new(k_max)?;
    let mut g = PopulationGraph::ring(n)?;
    let mut tracker = Tracker::new(ctx.cfg.max_evals);
    let mut pop: Vec<Individual<T>> = ctx.initial_population(&mut tracker, rng);
    tracker.record(0);
    let mut snapshots = Vec::new();
    let mut generation = 0;

    while !tracker.exhausted() && pop.len() == n && ctx.generation_allowed(generation + 1) {
        generation += 1;
        let ranks = assign_ranks(&pop, &ctx.comparator, rng);
        let rewirer = GenerationRewirer::new(&g, &ranks, &policy)?;
        let mut next = pop.clone();
        for n1 in 0..n {
            if tracker.exhausted() {
                break;
            }
            rewirer.step(&mut g, n1, rng);
            let n2 = walk_partner(&g, n1, rng)?;
            let op = OperatorSet::Seven.pick(rng);
            let donor = if op.needs_donor() { Some(walk_partner(&g, n1, rng)?) } else { None };
            let parents = Parents {
                first: &pop[n1].genome,
                second: &pop[n2].genome,
                donor: donor.map(|d| pop[d].genome.as_slice()),
                first_is_better: ranks.rank(n1) < ranks.rank(n2),
            };
            let genome = crate::variation::create_offspring(op, &parents, &ctx.domain, rng)?;
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
    Ok(finish(ctx.cfg, ctx.problem, tracker, snapshots, generation, false))
}
