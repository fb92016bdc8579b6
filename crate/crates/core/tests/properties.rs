//! Property tests over randomized instances.

use proptest::prelude::*;

use offline_zsg::bernstein::variance_under;
use offline_zsg::{
    empirical_model, random_game, sample_dataset, solve_matrix_game, split_stagewise,
    ExplorationPolicy, Game, Matrix,
};

fn arb_matrix(max_dim: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(rows, cols)| {
        proptest::collection::vec(0.0..scale, rows * cols)
            .prop_map(move |data| Matrix::new(rows, cols, data).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_value_is_monotone(q in arb_matrix(4, 3.0), bumps in proptest::collection::vec(0.0..0.7f64, 16)) {
        let eps = 1e-9;
        let larger = Matrix::from_fn(q.rows, q.cols, |i, j| q.at(i, j) + bumps[i * 4 + j]);
        let lo = solve_matrix_game(&q, eps).unwrap();
        let hi = solve_matrix_game(&larger, eps).unwrap();
        prop_assert!(lo.value <= hi.value + 2.0 * eps, "{} > {}", lo.value, hi.value);
    }

    #[test]
    fn matrix_value_is_shift_scale_equivariant(q in arb_matrix(4, 3.0), alpha in 0.1..4.0f64, beta in -2.0..2.0f64) {
        let eps = 1e-9;
        let transformed = Matrix::from_fn(q.rows, q.cols, |i, j| alpha * q.at(i, j) + beta);
        let base = solve_matrix_game(&q, eps).unwrap();
        let scaled = solve_matrix_game(&transformed, eps).unwrap();
        let expected = alpha * base.value + beta;
        prop_assert!(
            (scaled.value - expected).abs() <= (1.0 + alpha) * 10.0 * eps,
            "value {} vs expected {}", scaled.value, expected
        );
        prop_assert!(scaled.exploitability >= -1e-12);
        prop_assert!(scaled.exploitability <= eps);
    }

    #[test]
    fn solver_outputs_are_probability_vectors(q in arb_matrix(5, 5.0)) {
        let sol = solve_matrix_game(&q, 1e-8).unwrap();
        for strat in [&sol.max_strategy, &sol.min_strategy] {
            prop_assert!(strat.iter().all(|&p| p >= 0.0));
            prop_assert!((strat.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn game_json_round_trips_bit_exactly(seed in 0u64..500) {
        let game = random_game(seed, 3, 2, 2, 2).unwrap();
        let back: Game = serde_json::from_str(&game.to_json_string()).unwrap();
        prop_assert_eq!(game, back);
    }

    #[test]
    fn stagewise_split_is_a_partition(n in 8usize..120, seed in 0u64..50) {
        let game = random_game(1, 2, 2, 2, 4).unwrap();
        let rho = ExplorationPolicy::uniform(game.dims());
        let ds = sample_dataset(&game, &rho, n, seed).unwrap();
        let parts = split_stagewise(&ds, seed).unwrap();
        let mut seen = vec![false; n];
        for part in &parts {
            prop_assert_eq!(part.len(), n / 4);
            for &e in part {
                prop_assert!(!seen[e], "episode {} assigned twice", e);
                seen[e] = true;
            }
        }
    }

    #[test]
    fn empirical_transitions_are_count_multiples(seed in 0u64..40) {
        let game = random_game(2, 3, 2, 2, 2).unwrap();
        let rho = ExplorationPolicy::uniform(game.dims());
        let ds = sample_dataset(&game, &rho, 64, seed).unwrap();
        let all: Vec<usize> = (0..64).collect();
        let model = empirical_model(&ds, &all);
        let d = game.dims();
        for h in 0..d.horizon {
            for s in 0..d.num_states {
                for a in 0..d.num_actions_max {
                    for b in 0..d.num_actions_min {
                        let row = model.transition_row(h, s, a, b);
                        prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                        let n = model.count(h, s, a, b);
                        if n > 0 {
                            for &p in row {
                                let scaled = p * n as f64;
                                prop_assert!((scaled - scaled.round()).abs() <= 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn variance_matches_two_pass_computation(
        weights in proptest::collection::vec(0.01..1.0f64, 2..6),
        values in proptest::collection::vec(0.0..5.0f64, 6)
    ) {
        let total: f64 = weights.iter().sum();
        let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let v = &values[..p.len()];
        let got = variance_under(&p, v);
        let mean: f64 = p.iter().zip(v).map(|(pi, vi)| pi * vi).sum();
        let two_pass: f64 = p.iter().zip(v).map(|(pi, vi)| pi * (vi - mean) * (vi - mean)).sum();
        prop_assert!((got - two_pass).abs() <= 1e-12 * 25.0, "{got} vs {two_pass}");
    }
}

#[test]
fn empirical_kernel_error_shrinks_with_more_data() {
    // Median (over seeds) max-norm error of the empirical kernel against
    // the true kernel, on covered cells, at three dataset sizes.
    let game = random_game(3, 2, 2, 2, 2).unwrap();
    let rho = ExplorationPolicy::uniform(game.dims());
    let d = game.dims();
    let mut medians = Vec::new();
    for &n in &[1_000usize, 10_000, 100_000] {
        let mut errors = Vec::new();
        for seed in 0..10u64 {
            let ds = sample_dataset(&game, &rho, n, seed).unwrap();
            let all: Vec<usize> = (0..n).collect();
            let model = empirical_model(&ds, &all);
            let mut max_err = 0.0f64;
            for h in 0..d.horizon {
                for s in 0..d.num_states {
                    for a in 0..d.num_actions_max {
                        for b in 0..d.num_actions_min {
                            if model.count(h, s, a, b) == 0 {
                                continue;
                            }
                            let est = model.transition_row(h, s, a, b);
                            let truth = game.transition_row(h, s, a, b);
                            for (e, t) in est.iter().zip(truth) {
                                max_err = max_err.max((e - t).abs());
                            }
                        }
                    }
                }
            }
            errors.push(max_err);
        }
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(0.5 * (errors[4] + errors[5]));
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not decreasing: {medians:?}"
    );
}
