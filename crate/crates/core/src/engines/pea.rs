use rand::Rng;

use super::{finish, Ctx, EngineError, EsUpdate, Individual, RunRecord, Tracker, PARTNER_REDRAWS};
use crate::scalar::Scalar;
use crate::selection::{select, SelectionScheme};
use crate::variation::{create_offspring, OperatorSet, Parents};

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    pos
}

/// Panmictic ES. Generational: mu = N/2 parents produce lambda = N offspring
/// and only the best parent joins the survivor pool. Pseudo steady state:
/// mu = lambda = N and all parents join the pool.
pub(super) fn run_es<T: Scalar, R: Rng + ?Sized>(
    ctx: &Ctx<'_>,
    update: EsUpdate,
    scheme: SelectionScheme,
    operators: OperatorSet,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    let n = ctx.cfg.pop_size;
    let (mu, lambda) = match update {
        EsUpdate::Generational => (n / 2, n),
        EsUpdate::PseudoSteadyState => (n, n),
    };
    let mut tracker = Tracker::new(ctx.cfg.max_evals);
    let mut pop: Vec<Individual<T>> = ctx.initial_population(&mut tracker, rng);
    tracker.record(0);
    let mut generation = 0;

    while !tracker.exhausted() && pop.len() >= 2 && ctx.generation_allowed(generation + 1) {
        generation += 1;
        let order = ctx.comparator.order(&pop, rng);
        let pos = positions(&order);
        let mut offspring = Vec::with_capacity(lambda);
        while offspring.len() < lambda && !tracker.exhausted() {
            let (i, j) = distinct_pair(pop.len(), rng);
            let op = operators.pick(rng);
            let donor = if op.needs_donor() { Some(rng.gen_range(0..pop.len())) } else { None };
            let parents = Parents {
                first: &pop[i].genome,
                second: &pop[j].genome,
                donor: donor.map(|d| pop[d].genome.as_slice()),
                first_is_better: pos[i] < pos[j],
            };
            let genome = create_offspring(op, &parents, &ctx.domain, rng)?;
            offspring.push(tracker.evaluate(ctx.problem, genome));
        }
        if offspring.len() < lambda {
            // budget ran out mid-generation; the offspring already count toward the trace
            tracker.record(generation);
            break;
        }
        let mut pool = offspring;
        match update {
            EsUpdate::Generational => {
                let mut best = pop[order[0]].clone();
                best.age += 1;
                pool.push(best);
            }
            EsUpdate::PseudoSteadyState => {
                pool.extend(pop.into_iter().map(|mut p| {
                    p.age += 1;
                    p
                }));
            }
        }
        let ranked = ctx.comparator.order(&pool, rng);
        let chosen = select(scheme, &ranked, mu, rng)?;
        pop = chosen.into_iter().map(|i| pool[i].clone()).collect();
        tracker.record(generation);
    }
    Ok(finish(ctx.cfg, ctx.problem, tracker, Vec::new(), generation, false))
}

/// Steady-state GA: one offspring per step, replacing the worst member when
/// it wins the survivor comparison. A generation is `N` steps.
pub(super) fn run_ga<T: Scalar, R: Rng + ?Sized>(
    ctx: &Ctx<'_>,
    scheme: SelectionScheme,
    operators: OperatorSet,
    rng: &mut R,
) -> Result<RunRecord<T>, EngineError> {
    let n = ctx.cfg.pop_size;
    let mut tracker = Tracker::new(ctx.cfg.max_evals);
    let mut pop: Vec<Individual<T>> = ctx.initial_population(&mut tracker, rng);
    tracker.record(0);
    let mut generation = 0;
    if pop.len() < n {
        return Ok(finish(ctx.cfg, ctx.problem, tracker, Vec::new(), generation, false));
    }
    // population indices, best first
    let mut order = ctx.comparator.order(&pop, rng);
    let mut step = 0usize;

    while !tracker.exhausted() && ctx.generation_allowed(generation + 1) {
        let pos = positions(&order);
        let a = select(scheme, &order, 1, rng)?[0];
        let mut b = select(scheme, &order, 1, rng)?[0];
        for _ in 0..PARTNER_REDRAWS {
            if b != a {
                break;
            }
            b = select(scheme, &order, 1, rng)?[0];
        }
        let op = operators.pick(rng);
        let donor = if op.needs_donor() { Some(rng.gen_range(0..n)) } else { None };
        let parents = Parents {
            first: &pop[a].genome,
            second: &pop[b].genome,
            donor: donor.map(|d| pop[d].genome.as_slice()),
            first_is_better: pos[a] < pos[b],
        };
        let genome = create_offspring(op, &parents, &ctx.domain, rng)?;
        let child = tracker.evaluate(ctx.problem, genome);
        let worst = order[n - 1];
        if ctx.comparator.challenger_wins(&child, &pop[worst], rng) {
            pop[worst] = child;
            let mut p = n - 1;
            while p > 0 && ctx.comparator.precedes(&pop[order[p]], &pop[order[p - 1]], rng) {
                order.swap(p, p - 1);
                p -= 1;
            }
        }
        step += 1;
        if step % n == 0 || tracker.exhausted() {
            generation += 1;
            for ind in &mut pop {
                ind.age += 1;
            }
            tracker.record(generation);
        }
    }
    Ok(finish(ctx.cfg, ctx.problem, tracker, Vec::new(), generation, false))
}
