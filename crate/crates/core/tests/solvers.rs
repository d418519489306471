//! Cross-module solver properties.

mod common;

use gssl::operators::{closed_form_solve, fixed_point_residual, DENSE_LIMIT};
use gssl::power::{power_solve, with_threads};
use gssl::sampling::{run_sampling, sampling_update, SelectionPolicy, SolverConfig, StepSchedule, UpdateRule};
use gssl::{alpha_from_mu, classify, DiffusionOperator, FeatureMatrix, WalkKernel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_converges_to_fixed_point(seed in any::<u64>()) {
        let inst = common::random_instance(seed, (5, 40), 4);
        let op = DiffusionOperator::build(&inst.graph, inst.sigma).unwrap();
        let alpha = alpha_from_mu(inst.mu).unwrap();
        let (f, report) = power_solve(&inst.y, &op, &inst.y, alpha, 1e-12, 100_000).unwrap();
        prop_assert!(report.converged);
        prop_assert!(report.ratios.iter().take(20).all(|&r| r <= alpha + 1e-9));
        prop_assert!(fixed_point_residual(&op, &f, &inst.y, alpha) < 1e-10);
    }

    #[test]
    fn teleport_kernel_rows_sum_to_one(seed in any::<u64>(), eps in 0.01f64..0.99) {
        let inst = common::random_instance(seed, (3, 25), 2);
        let op = DiffusionOperator::build(&inst.graph, inst.sigma).unwrap();
        let k = WalkKernel::new(&op, eps).unwrap();
        let n = op.n();
        for i in 0..n {
            let p: f64 = k.p_row(i).1.iter().sum();
            prop_assert!((p - 1.0).abs() < 1e-12);
            let q: f64 = (0..n).map(|j| k.q(i, j)).sum();
            prop_assert!((q - 1.0).abs() < 1e-12);
            prop_assert!((0..n).all(|j| k.q(i, j) >= eps / n as f64 - 1e-18));
        }
    }
}

#[test]
fn sampling_approaches_closed_form() {
    let inst = common::random_instance(42, (20, 20), 3);
    let config = SolverConfig { seed: 5, ..SolverConfig::default() };
    let op = DiffusionOperator::build(&inst.graph, config.sigma).unwrap();
    let star = closed_form_solve(&op, &inst.y, config.alpha().unwrap(), DENSE_LIMIT).unwrap();
    let (f_short, _) = run_sampling(&inst.graph, &inst.labels, &config, 50, None).unwrap();
    let (f_long, _) = run_sampling(&inst.graph, &inst.labels, &config, 20_000, None).unwrap();
    let d_short = f_short.max_abs_diff(&star);
    let d_long = f_long.max_abs_diff(&star);
    assert!(d_long < d_short, "{d_long} vs {d_short}");
    assert!(d_long < 0.03, "{d_long}");
}

#[test]
fn round_robin_and_mcmc_agree_on_classes() {
    let d = gssl::datasets::les_miserables();
    let mk = |policy| SolverConfig { policy, seed: 9, ..SolverConfig::default() };
    let (a, _) = run_sampling(&d.graph, &d.labels, &mk(SelectionPolicy::Mcmc), 500, Some(&d.truth)).unwrap();
    let (b, _) = run_sampling(&d.graph, &d.labels, &mk(SelectionPolicy::RoundRobin), 500, Some(&d.truth)).unwrap();
    let (ca, cb) = (classify(&a), classify(&b));
    let same = ca.iter().zip(&cb).filter(|(x, y)| x == y).count();
    assert!(same >= 73, "{same}/77");
}

#[test]
fn printed_rule_has_a_different_fixed_point() {
    let d = gssl::datasets::les_miserables();
    let consistent = SolverConfig { seed: 1, ..SolverConfig::default() };
    let printed = SolverConfig { update_rule: UpdateRule::Printed, ..consistent.clone() };
    let (a, _) = run_sampling(&d.graph, &d.labels, &consistent, 100, None).unwrap();
    let (b, _) = run_sampling(&d.graph, &d.labels, &printed, 100, None).unwrap();
    assert!(a.max_abs_diff(&b) > 1e-3);
    assert!(b.all_finite());
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let d = gssl::datasets::les_miserables();
    let config = SolverConfig { seed: 7, schedule: StepSchedule::Decreasing { period: 100 }, ..SolverConfig::default() };
    let (a, ta) = run_sampling(&d.graph, &d.labels, &config, 50, Some(&d.truth)).unwrap();
    let (b, tb) = run_sampling(&d.graph, &d.labels, &config, 50, Some(&d.truth)).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let other = SolverConfig { seed: 8, ..config };
    let (c, _) = run_sampling(&d.graph, &d.labels, &other, 50, None).unwrap();
    assert_ne!(a, c);
}

#[test]
fn power_is_thread_count_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = common::random_connected_graph(&mut rng, 500);
    let labels = common::random_labels(&mut rng, 500, 3);
    let y = labels.indicator(&g).unwrap();
    let op = DiffusionOperator::build(&g, 0.0).unwrap();
    let run = || power_solve(&y, &op, &y, 0.8, 1e-12, 500).unwrap().0;
    let results: Vec<FeatureMatrix> = [1, 2, 3, 8].iter().map(|&t| with_threads(t, run).unwrap()).collect();
    for r in &results[1..] {
        assert!(r.as_slice().iter().zip(results[0].as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

#[test]
fn free_update_matches_expected_direction() {
    let inst = common::random_instance(77, (6, 6), 2);
    let op = DiffusionOperator::build(&inst.graph, 0.5).unwrap();
    let kernel = WalkKernel::new(&op, 0.1).unwrap();
    let alpha = alpha_from_mu(1.0).unwrap();
    let star = closed_form_solve(&op, &inst.y, alpha, DENSE_LIMIT).unwrap();
    // At the fixed point the expected increment is zero; a single sampled
    // update still moves row i only.
    let mut f = star.clone();
    let (j, _) = (0..6).map(|j| (j, kernel.p(0, j))).find(|&(_, p)| p > 0.0).unwrap();
    sampling_update(&mut f, 0, j, 0.5, &op, &kernel, &inst.y, alpha);
    for r in 1..6 {
        assert_eq!(f.row(r), star.row(r));
    }
}
