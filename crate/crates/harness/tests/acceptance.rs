//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured quantities (visible with `--nocapture`; the test
//! harness prints one ok/FAILED line per criterion either way).

mod common;

use std::time::Instant;

use offline_zsg::{
    coverage_report, duality_gap, make_hardness_pair, max_best_response, min_best_response,
    nash_vi, occupancy, random_game, run_bernstein, run_hoeffding, sample_dataset,
    solve_matrix_game, ExplorationPolicy, Matrix, MinStrategy, Player, StrategyPair,
};
use offline_zsg_harness::{
    fit_loglog_slope, median, reproduce_hardness, run_sweep, Algorithm, AlgorithmChoice,
    ExperimentConfig, EXACT_EPS_NE, LEARNER_EPS_NE,
};

use common::{
    fixture_game, fixture_skewed_rho, grid_backward_induction_value, random_strategy, FIXTURE_C,
};

fn report(criterion: usize, name: &str, details: &str, started: Instant) {
    println!(
        "acceptance {criterion} ({name}): PASS [{details}] in {:.2}s",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn acceptance_1_exact_solver_matches_grid_oracle() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..25u64 {
        let s = 1 + (i % 3) as usize;
        let h = 1 + (i % 2) as usize;
        let game = random_game(400 + i, s, 2, 2, h).unwrap();
        let (pair, values) = nash_vi(&game, EXACT_EPS_NE).unwrap();
        let oracle = grid_backward_induction_value(&game);
        let err = (values.at_start(0) - oracle).abs();
        assert!(
            err < 1e-3,
            "game {i}: solver {} vs oracle {} (err {err})",
            values.at_start(0),
            oracle
        );
        worst = worst.max(err);
        let gap = duality_gap(&game, &pair).unwrap();
        assert!(
            gap <= 2.0 * h as f64 * EXACT_EPS_NE,
            "game {i}: equilibrium gap {gap}"
        );
    }
    report(
        1,
        "exact solver vs grid oracle on 25 games",
        &format!("worst value error {worst:.2e}"),
        started,
    );
}

#[test]
fn acceptance_2_matrix_equilibria() {
    let started = Instant::now();
    // Rock-paper-scissors shifted into [0, 1].
    let rps = Matrix::new(
        3,
        3,
        vec![0.5, 0.0, 1.0, 1.0, 0.5, 0.0, 0.0, 1.0, 0.5],
    )
    .unwrap();
    let sol = solve_matrix_game(&rps, 1e-8).unwrap();
    for p in sol.max_strategy.iter().chain(&sol.min_strategy) {
        assert!((p - 1.0 / 3.0).abs() < 1e-8, "not uniform: {p}");
    }
    assert!((sol.value - 0.5).abs() < 1e-9);
    assert!(sol.exploitability <= 1e-8);

    let bandit = Matrix::new(2, 2, vec![0.25, 0.5, 0.0, 0.75]).unwrap();
    let sol = solve_matrix_game(&bandit, 1e-9).unwrap();
    assert!((sol.value - 0.25).abs() < 1e-12);
    assert!((sol.max_strategy[0] - 1.0).abs() < 1e-12);
    assert!((sol.min_strategy[0] - 1.0).abs() < 1e-12);
    report(
        2,
        "matrix equilibria",
        &format!("rps exploitability {:.2e}", sol.exploitability),
        started,
    );
}

#[test]
fn acceptance_3_deterministic_envelope_orderings() {
    let started = Instant::now();
    for i in 0..50u64 {
        let s = 2 + (i % 2) as usize;
        let h = 2 + (i % 2) as usize;
        let game = random_game(700 + i, s, 2, 2, h).unwrap();
        let rho = ExplorationPolicy::uniform(game.dims());
        let n = 3 * h + (i as usize * 37) % 500;
        let ds = sample_dataset(&game, &rho, n, i).unwrap();
        let d = game.dims();

        let hoeffding = run_hoeffding(&ds, false, 0.05, LEARNER_EPS_NE, i).unwrap();
        let bernstein = run_bernstein(&ds, false, 0.05, 1.0, LEARNER_EPS_NE, i).unwrap();
        for hh in 0..d.horizon {
            for ss in 0..d.num_states {
                assert!(
                    hoeffding.learner.v_low.v(hh, ss)
                        <= hoeffding.learner.v_up.v(hh, ss) + 1e-12
                );
                for a in 0..d.num_actions_max {
                    for b in 0..d.num_actions_min {
                        assert!(
                            hoeffding.learner.q_low.get(hh, ss, a, b)
                                <= hoeffding.learner.q_up.get(hh, ss, a, b) + 1e-12
                        );
                        assert!(
                            bernstein.learner.q_low.get(hh, ss, a, b)
                                >= bernstein.reference.q_low.get(hh, ss, a, b)
                        );
                        assert!(
                            bernstein.learner.q_up.get(hh, ss, a, b)
                                <= bernstein.reference.q_up.get(hh, ss, a, b)
                        );
                    }
                }
                assert!(
                    bernstein.learner.v_low.v(hh, ss)
                        >= bernstein.reference.v_low.v(hh, ss) - 1e-12
                );
                assert!(
                    bernstein.learner.v_up.v(hh, ss)
                        <= bernstein.reference.v_up.v(hh, ss) + 1e-12
                );
            }
        }
    }
    report(3, "deterministic envelope orderings on 50 pairs", "exact", started);
}

#[test]
fn acceptance_4_pessimism_frequency() {
    let started = Instant::now();
    let game = fixture_game();
    let rho = ExplorationPolicy::uniform(game.dims());
    let runs = 200u64;
    let mut good = [0usize; 2];
    for seed in 0..runs {
        let ds = sample_dataset(&game, &rho, 10_000, seed).unwrap();
        let outputs = [
            {
                let o = run_hoeffding(&ds, false, 0.05, LEARNER_EPS_NE, seed).unwrap();
                (o.learner.strategy_pair(), o.learner.v_low.at_start(0), o.learner.v_up.at_start(0))
            },
            {
                let o = run_bernstein(&ds, false, 0.05, FIXTURE_C, LEARNER_EPS_NE, seed).unwrap();
                (o.learner.strategy_pair(), o.learner.v_low.at_start(0), o.learner.v_up.at_start(0))
            },
        ];
        for (k, (pair, v_low, v_up)) in outputs.into_iter().enumerate() {
            let lower_target = min_best_response(&game, &pair.max).unwrap().values.at_start(0);
            let upper_target = max_best_response(&game, &pair.min).unwrap().values.at_start(0);
            if v_low <= lower_target + 1e-9 && v_up >= upper_target - 1e-9 {
                good[k] += 1;
            }
        }
    }
    let threshold = (runs as usize) * 9 / 10;
    assert!(
        good[0] >= threshold,
        "hoeffding pessimism held in {}/{} runs",
        good[0],
        runs
    );
    assert!(
        good[1] >= threshold,
        "bernstein pessimism held in {}/{} runs",
        good[1],
        runs
    );
    report(
        4,
        "pessimism frequency over 200 runs",
        &format!("hoeffding {}/200, bernstein {}/200", good[0], good[1]),
        started,
    );
}

#[test]
fn acceptance_5_rate_slopes() {
    let started = Instant::now();
    let game = fixture_game();
    let rho = fixture_skewed_rho();
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        game: "fixture".into(),
        rho: "fixture-skewed".into(),
        algorithm: AlgorithmChoice::Both,
        n_grid: vec![1_000, 10_000, 100_000, 1_000_000],
        seeds: (0..20).collect(),
        delta: 0.05,
        c: FIXTURE_C,
        eps_ne: LEARNER_EPS_NE,
        out: dir.path().join("rate.csv"),
        workers: 0,
        timeout_seconds: 300.0,
    };
    let result = run_sweep(&cfg, &game, &rho).unwrap();
    assert_eq!(result.failed_rows(), 0);
    let mut details = Vec::new();
    for algorithm in [Algorithm::Hoeffding, Algorithm::Bernstein] {
        let points: Vec<(f64, f64)> = cfg
            .n_grid
            .iter()
            .map(|&n| {
                let gaps: Vec<f64> = result
                    .rows
                    .iter()
                    .filter(|r| r.algorithm == algorithm && r.n == n)
                    .map(|r| r.gap.unwrap())
                    .collect();
                (n as f64, median(&gaps))
            })
            .collect();
        let fit = fit_loglog_slope(&points).unwrap();
        assert!(
            (-0.70..=-0.30).contains(&fit.slope),
            "{algorithm} slope {} outside [-0.70, -0.30] (medians {points:?})",
            fit.slope
        );
        details.push(format!("{algorithm} slope {:.3}", fit.slope));
    }
    report(5, "rate slopes on the fixed game", &details.join(", "), started);
}

#[test]
fn acceptance_6_hardness_reproduction() {
    let started = Instant::now();
    let report_data = reproduce_hardness(1_000_000, 0, 0.05, 1.0, LEARNER_EPS_NE).unwrap();
    assert!(report_data.models_identical, "empirical models must be bit-identical");
    for row in &report_data.rows {
        assert!(
            row.sum >= 0.5 - 1e-6,
            "{}: gap sum {} below 0.5",
            row.algorithm,
            row.sum
        );
        assert!(
            row.max >= 0.25 - 1e-6,
            "{}: max gap {} below 0.25",
            row.algorithm,
            row.max
        );
    }
    let details: Vec<String> = report_data
        .rows
        .iter()
        .map(|r| format!("{} sum {:.3} max {:.3}", r.algorithm, r.sum, r.max))
        .collect();
    report(6, "indistinguishability floor at n=1e6", &details.join(", "), started);
}

#[test]
fn acceptance_7_coverage_diagnostics() {
    let started = Instant::now();
    // Hardness instance: unilateral coverage fails with a concrete witness.
    let (game1, _, rho) = make_hardness_pair();
    let (pair, _) = nash_vi(&game1, EXACT_EPS_NE).unwrap();
    let cov = coverage_report(&game1, &rho, &pair).unwrap();
    assert!(!cov.assumption2_holds);
    assert!(cov.c_star.is_infinite());
    let witness = cov.witness.as_ref().expect("witness required");
    assert_eq!(
        (witness.timestep, witness.state, witness.action_max, witness.action_min),
        (0, 0, 1, 0),
        "witness must name the uncovered pair (a2, b1)"
    );
    // Uniform exploration on a single-state game: full coverage.
    let game = random_game(23, 1, 2, 2, 3).unwrap();
    let uniform = ExplorationPolicy::uniform(game.dims());
    let (pair, _) = nash_vi(&game, EXACT_EPS_NE).unwrap();
    let cov_uniform = coverage_report(&game, &uniform, &pair).unwrap();
    assert!(cov_uniform.assumption3_holds);
    assert!(cov_uniform.c_star <= 1.0 / cov_uniform.d_m + 1e-6);
    report(
        7,
        "coverage diagnostics",
        &format!(
            "hardness c_star inf; uniform c_star {:.3} <= 1/d_m {:.3}",
            cov_uniform.c_star,
            1.0 / cov_uniform.d_m
        ),
        started,
    );
}

#[test]
fn acceptance_8_turn_based_mode() {
    let started = Instant::now();
    let mut checked = 0;
    for game_seed in 500..510u64 {
        let game = random_game(game_seed, 3, 2, 2, 3)
            .unwrap()
            .with_turn_based(true);
        let (pair, _) = nash_vi(&game, EXACT_EPS_NE).unwrap();
        assert!(pair.max.is_point_mass(0.0));
        assert!(pair.min.is_point_mass(0.0));
        let rho = ExplorationPolicy::uniform(game.dims());
        for algorithm in [Algorithm::Hoeffding, Algorithm::Bernstein] {
            let mut medians = Vec::new();
            for n in [1_000usize, 100_000] {
                let gaps: Vec<f64> = (0..10u64)
                    .map(|seed| {
                        let ds = sample_dataset(&game, &rho, n, seed).unwrap();
                        let pair = match algorithm {
                            Algorithm::Hoeffding => {
                                let o =
                                    run_hoeffding(&ds, true, 0.05, LEARNER_EPS_NE, seed).unwrap();
                                assert!(o.learner.max_strategy.is_point_mass(0.0));
                                assert!(o.learner.min_strategy.is_point_mass(0.0));
                                o.learner.strategy_pair()
                            }
                            Algorithm::Bernstein => {
                                let o = run_bernstein(
                                    &ds,
                                    true,
                                    0.05,
                                    FIXTURE_C,
                                    LEARNER_EPS_NE,
                                    seed,
                                )
                                .unwrap();
                                assert!(o.learner.max_strategy.is_point_mass(0.0));
                                assert!(o.learner.min_strategy.is_point_mass(0.0));
                                o.learner.strategy_pair()
                            }
                        };
                        duality_gap(&game, &pair).unwrap()
                    })
                    .collect();
                medians.push(median(&gaps));
            }
            assert!(
                medians[1] < medians[0],
                "game {game_seed} {algorithm}: median gap {} at n=1e5 not below {} at n=1e3",
                medians[1],
                medians[0]
            );
            checked += 1;
        }
    }
    report(
        8,
        "turn-based mode on 10 games",
        &format!("{checked} (game, algorithm) median comparisons"),
        started,
    );
}

#[test]
fn acceptance_9_occupancy_and_weak_duality() {
    let started = Instant::now();
    for i in 0..100u64 {
        let s = 2 + (i % 2) as usize;
        let h = 2 + (i % 3) as usize;
        let game = random_game(900 + i, s, 2, 2, h).unwrap();
        let pair = StrategyPair {
            max: random_strategy(2 * i + 1, Player::Max, h, s, 2),
            min: MinStrategy::Simultaneous(random_strategy(2 * i + 2, Player::Min, h, s, 2)),
        };
        let occ = occupancy(&game, &pair).unwrap();
        for hh in 0..h {
            assert!(
                (occ.stage_sum(hh) - 1.0).abs() <= 1e-9,
                "occupancy at h={hh} sums to {}",
                occ.stage_sum(hh)
            );
        }
        let gap = duality_gap(&game, &pair).unwrap();
        assert!(gap >= -1e-9, "weak duality violated: gap {gap}");
    }
    report(9, "occupancy normalization and weak duality on 100 pairs", "ok", started);
}
