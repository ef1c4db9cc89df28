use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sotea_core::growth::{
    ba_grow, dd_expected_degree, dd_grow, dd_step, fitness_graph_from_values, fitness_model_generate, tail_exponent,
    BaState, FitnessDistribution, DD_ALPHA_COEFF, DD_DELTA,
};
use sotea_core::metrics::TopologyReport;
use sotea_core::PopulationGraph;

#[test]
fn ba_attachment_frequencies_on_frozen_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = BaState::seed(4).unwrap();
    for _ in 0..30 {
        state.grow_one(2, &mut rng);
    }
    let degrees = state.graph.degrees();
    let total: usize = degrees.iter().sum();
    let draws = 100_000;
    let mut counts = vec![0usize; degrees.len()];
    for _ in 0..draws {
        counts[state.draw(&mut rng)] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let p = degrees[i] as f64 / total as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sigma.max(1.0), "node {i}");
    }
}

#[test]
fn ba_tail_exponent_near_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = ba_grow(3, 2, 10_000, &mut rng).unwrap();
    let gamma = tail_exponent(&g, 2, 10).unwrap();
    assert!((2.0..=3.5).contains(&gamma), "{gamma}");
    assert!(TopologyReport::of(&g).is_ok());
}

#[test]
fn dd_duplicate_degree_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = dd_grow(&PopulationGraph::ring(5).unwrap(), DD_DELTA, DD_ALPHA_COEFF, 60, &mut rng).unwrap();
    let n = base.node_count();
    let coeff = 3.0; // larger than the default so the random-link term is visible
    let trials = 40_000;
    let mut sum_diff = 0.0;
    let mut var = 0.0;
    for _ in 0..trials {
        let mut g = base.clone();
        let (orig, dup) = dd_step(&mut g, DD_DELTA, coeff, &mut rng).unwrap();
        let expected = dd_expected_degree(base.deg(orig), n, DD_DELTA, coeff);
        let d = g.deg(dup) as f64 - expected;
        sum_diff += d;
        var += d * d;
    }
    let mean = sum_diff / trials as f64;
    let se = (var / trials as f64 / trials as f64).sqrt();
    assert!(mean.abs() < 4.0 * se, "mean deviation {mean} se {se}");
}

#[test]
fn dd_default_graph_is_sparse_and_measurable() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = dd_grow(&PopulationGraph::ring(5).unwrap(), DD_DELTA, DD_ALPHA_COEFF, 2000, &mut rng).unwrap();
    let lc = g.largest_component();
    let report = TopologyReport::of(&lc).unwrap();
    assert!(report.k_ave < 0.05 * 2000.0);
}

#[test]
fn fitness_link_rate_matches_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x_max = 10.0;
    // two fitness classes give three pair types with known probabilities
    let n = 400;
    let x: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 3.0 } else { 8.0 }).collect();
    let mut links = [0usize; 3];
    let mut pairs = [0usize; 3];
    for _ in 0..5 {
        let g = fitness_graph_from_values(&x, x_max, &mut rng).unwrap();
        for a in 0..n {
            for b in (a + 1)..n {
                let t = (a % 2) + (b % 2);
                pairs[t] += 1;
                if g.has_edge(a, b) {
                    links[t] += 1;
                }
            }
        }
    }
    for t in 0..3 {
        let (xa, xb) = [(3.0, 3.0), (3.0, 8.0), (8.0, 8.0)][t];
        let p = xa * xb / (x_max * x_max);
        let sigma = (pairs[t] as f64 * p * (1.0 - p)).sqrt();
        assert!((links[t] as f64 - pairs[t] as f64 * p).abs() < 3.0 * sigma, "type {t}");
    }
}

#[test]
fn fitness_exponential_is_heavy_tailed() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (g, x) = fitness_model_generate(5000, FitnessDistribution::Exponential, 10.0, &mut rng).unwrap();
    assert!(x.iter().all(|v| (0.0..=10.0).contains(v)));
    let degrees = g.degrees();
    let mean = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
    let max = *degrees.iter().max().unwrap() as f64;
    assert!(max > 5.0 * mean, "max {max} mean {mean}");
    assert!(tail_exponent(&g, 1, 10).is_some());
    let _: f64 = rng.gen();
}
