use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sotea_core::engines::{self, design_matrix, EngineConfig, EsUpdate, Family, RunRecord};
use sotea_core::problems::Problem;
use sotea_core::selection::SelectionScheme;
use sotea_core::topology::SetPointPolicy;
use sotea_core::variation::OperatorSet;

fn monotone(rec: &RunRecord<f64>) -> bool {
    let sign = match rec.problem.sense() {
        sotea_core::problems::Sense::Minimize => 1.0,
        sotea_core::problems::Sense::Maximize => -1.0,
    };
    rec.trace.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        // once feasible, never back to infeasible; cost never rises among feasible rows
        (!a.feasible || b.feasible) && (!(a.feasible && b.feasible) || sign * b.best <= sign * a.best)
    })
}

#[test]
fn sotea_full_budget_is_exact() {
    let cfg = EngineConfig::sotea(7).with_seed(3);
    let rec: RunRecord<f64> = engines::run(&cfg, Problem::Rastrigin).unwrap();
    assert_eq!(rec.evals, 150_000);
    // the initial population fills the first generation's worth of evaluations
    assert_eq!(rec.generations + 1, 3000);
    assert_eq!(rec.trace.last().unwrap().evals, 150_000);
    assert!(monotone(&rec));
    assert_eq!(rec.snapshots.len(), 2999 / 50);
    assert!(rec.snapshots.iter().all(|s| s.graph.is_connected()));
}

#[test]
fn every_design_respects_budget_and_is_monotone() {
    for problem in [Problem::Rastrigin, Problem::PressureVessel, Problem::Ecc] {
        for cfg in design_matrix() {
            let cfg = cfg.with_max_evals(2_017).with_seed(11);
            let rec: RunRecord<f64> = engines::run(&cfg, problem).unwrap();
            assert_eq!(rec.evals, 2_017, "{} on {problem}", cfg.label());
            assert!(monotone(&rec), "{} on {problem}", cfg.label());
            assert_eq!(rec.trace.last().unwrap().evals, 2_017);
        }
    }
}

#[test]
fn identical_seeds_identical_records() {
    for cfg in design_matrix() {
        let cfg = cfg.with_max_evals(3_000).with_seed(42);
        let a: RunRecord<f64> = engines::run(&cfg, Problem::WeldedBeam).unwrap();
        let b: RunRecord<f64> = engines::run(&cfg, Problem::WeldedBeam).unwrap();
        assert_eq!(a, b, "{}", cfg.label());
    }
}

#[test]
fn generation_cap() {
    let cfg = EngineConfig::sotea(5).with_max_generations(100);
    let rec: RunRecord<f64> = engines::run(&cfg, Problem::Griewangk).unwrap();
    assert_eq!(rec.generations, 100);
    assert_eq!(rec.evals, 50 + 100 * 50);
    assert_eq!(rec.snapshots.iter().map(|s| s.generation).collect::<Vec<_>>(), vec![50, 100]);
}

#[test]
fn cga_panmictic_flag() {
    let small: RunRecord<f64> = engines::run(&EngineConfig::cga(12).with_max_evals(500), Problem::Rastrigin).unwrap();
    assert!(!small.panmictic);
    let wide: RunRecord<f64> = engines::run(&EngineConfig::cga(25).with_max_evals(500), Problem::Rastrigin).unwrap();
    assert!(wide.panmictic);
    assert_eq!(engines::ring_neighborhood(50, 0, 1).len(), 2);
}

#[test]
fn cga_snapshot_is_the_neighborhood_lattice() {
    let rec: RunRecord<f64> =
        engines::run(&EngineConfig::cga(4).with_max_generations(50).with_max_evals(u64::MAX), Problem::Ecc).unwrap();
    let g = &rec.snapshots[0].graph;
    assert!(g.degrees().into_iter().all(|d| d == 8));
    assert_eq!(g.neighbors(0), engines::ring_neighborhood(50, 0, 4).as_slice());
}

#[test]
fn ga_rejects_worse_offspring_and_best_never_worsens() {
    let cfg = EngineConfig::new(Family::PeaGa { selection: SelectionScheme::LinearRanking, operators: OperatorSet::Two })
        .with_max_evals(20_000)
        .with_seed(5);
    let rec: RunRecord<f64> = engines::run(&cfg, Problem::Griewangk).unwrap();
    assert!(monotone(&rec));
    assert_eq!(rec.generations, 20_000usize.div_ceil(50) - 1);
}

#[test]
fn f32_engines_run() {
    let cfg = EngineConfig::new(Family::PeaEs {
        update: EsUpdate::Generational,
        selection: SelectionScheme::Truncation,
        operators: OperatorSet::Seven,
    })
    .with_max_evals(5_000);
    let rec: RunRecord<f32> = engines::run(&cfg, Problem::SysLinEq).unwrap();
    assert_eq!(rec.evals, 5_000);
    assert!(rec.best.objective() < 200.0);
}

#[test]
fn runner_helpers_check_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = EngineConfig::cga(2).with_max_evals(200);
    assert!(engines::run_cga::<f64, _>(&cfg, Problem::Rastrigin, &mut rng).is_ok());
    assert!(engines::run_sotea::<f64, _>(&cfg, Problem::Rastrigin, &mut rng).is_err());
    assert!(engines::run_pea_es::<f64, _>(&cfg, Problem::Rastrigin, &mut rng).is_err());
    assert!(engines::run_pea_ga::<f64, _>(&cfg, Problem::Rastrigin, &mut rng).is_err());
}

#[test]
fn set_points_ordered_by_rank() {
    for k_max in [3, 5, 7, 9] {
        let p = SetPointPolicy::new(k_max).unwrap();
        for r in 1..50 {
            assert!(p.set_point(r, 50).unwrap() >= p.set_point(r + 1, 50).unwrap());
        }
    }
}

#[test]
fn sotea_makes_progress_on_gear_train() {
    let cfg = EngineConfig::sotea(7).with_max_evals(30_000).with_seed(1);
    let rec: RunRecord<f64> = engines::run(&cfg, Problem::GearTrain).unwrap();
    assert!(rec.best.objective() < 1e-8, "{}", rec.best.objective());
}
