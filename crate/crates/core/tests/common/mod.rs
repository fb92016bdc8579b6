//! Independent oracles for the integration tests: grid search over mixed
//! strategies, brute-force backward induction, Monte Carlo occupancy,
//! and exhaustive deviation enumeration. None of these call the solver
//! paths they are used to check.

// Each test binary compiles this module; not every binary uses every helper.
#![allow(dead_code)]

use offline_zsg::{Game, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// `min_b (mu^T Q)_b` for a row mixture over a payoff table.
fn worst_column_payoff(q: &[Vec<f64>], mu: &[f64]) -> f64 {
    let cols = q[0].len();
    (0..cols)
        .map(|b| mu.iter().enumerate().map(|(a, &p)| p * q[a][b]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Enumerates mixtures over `dim` actions with the given step; calls `f`
/// on each.
fn for_each_mixture<F: FnMut(&[f64])>(dim: usize, step: f64, f: &mut F) {
    let ticks = (1.0 / step).round() as usize;
    match dim {
        1 => f(&[1.0]),
        2 => {
            for i in 0..=ticks {
                let p = i as f64 * step;
                f(&[p, 1.0 - p]);
            }
        }
        3 => {
            for i in 0..=ticks {
                for j in 0..=(ticks - i) {
                    let p = i as f64 * step;
                    let q = j as f64 * step;
                    f(&[p, q, (1.0 - p - q).max(0.0)]);
                }
            }
        }
        _ => panic!("grid oracle supports up to 3 actions"),
    }
}

/// Game value by grid search over the max player's mixtures (coarse pass
/// then a refinement pass around the best point). Independent of the LP
/// solver. Accurate to roughly the fine step times the payoff range.
pub fn grid_matrix_value(q: &[Vec<f64>]) -> f64 {
    let dim = q.len();
    let mut best = f64::NEG_INFINITY;
    let mut best_mu = vec![0.0; dim];
    for_each_mixture(dim, 0.01, &mut |mu| {
        let v = worst_column_payoff(q, mu);
        if v > best {
            best = v;
            best_mu = mu.to_vec();
        }
    });
    // Local refinement: perturb the coarse optimum on a fine grid.
    let fine = 1e-4;
    let radius = 0.012;
    match dim {
        1 => {}
        2 => {
            let lo = (best_mu[0] - radius).max(0.0);
            let hi = (best_mu[0] + radius).min(1.0);
            let mut p = lo;
            while p <= hi {
                let v = worst_column_payoff(q, &[p, 1.0 - p]);
                if v > best {
                    best = v;
                }
                p += fine;
            }
        }
        3 => {
            let lo0 = (best_mu[0] - radius).max(0.0);
            let hi0 = (best_mu[0] + radius).min(1.0);
            let lo1 = (best_mu[1] - radius).max(0.0);
            let hi1 = (best_mu[1] + radius).min(1.0);
            let mut p = lo0;
            while p <= hi0 {
                let mut r = lo1;
                while r <= hi1 && p + r <= 1.0 {
                    let v = worst_column_payoff(q, &[p, r, 1.0 - p - r]);
                    if v > best {
                        best = v;
                    }
                    r += fine;
                }
                p += fine;
            }
        }
        _ => unreachable!(),
    }
    best
}

/// Exact-by-construction reference for the equilibrium value of a game:
/// backward induction where each stage matrix is solved by the grid
/// oracle instead of the LP.
pub fn grid_backward_induction_value(game: &Game) -> f64 {
    let d = game.dims();
    let mut v_next = vec![0.0; d.num_states];
    for h in (0..d.horizon).rev() {
        let mut v = vec![0.0; d.num_states];
        for s in 0..d.num_states {
            let q: Vec<Vec<f64>> = (0..d.num_actions_max)
                .map(|a| {
                    (0..d.num_actions_min)
                        .map(|b| {
                            let cont: f64 = game
                                .transition_row(h, s, a, b)
                                .iter()
                                .zip(&v_next)
                                .map(|(p, vn)| p * vn)
                                .sum();
                            game.reward(h, s, a, b) + cont
                        })
                        .collect()
                })
                .collect();
            v[s] = grid_matrix_value(&q);
        }
        v_next = v;
    }
    v_next[d.initial_state]
}

/// Monte Carlo estimate of the occupancy of one cell under a joint
/// policy, simulating trajectories directly (no crate machinery).
pub fn monte_carlo_occupancy<F: Fn(usize, usize) -> Vec<f64>>(
    game: &Game,
    joint_row: F,
    episodes: usize,
    seed: u64,
) -> Vec<f64> {
    let d = game.dims();
    let cells = d.horizon * d.num_states * d.num_actions_max * d.num_actions_min;
    let mut counts = vec![0u64; cells];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw = |weights: &[f64], rng: &mut ChaCha12Rng| -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    };
    for _ in 0..episodes {
        let mut s = d.initial_state;
        for h in 0..d.horizon {
            let joint = joint_row(h, s);
            let idx = draw(&joint, &mut rng);
            let (a, b) = (idx / d.num_actions_min, idx % d.num_actions_min);
            counts[((h * d.num_states + s) * d.num_actions_max + a) * d.num_actions_min + b] += 1;
            s = draw(game.transition_row(h, s, a, b), &mut rng);
        }
    }
    counts
        .into_iter()
        .map(|c| c as f64 / episodes as f64)
        .collect()
}

/// Exact occupancy of (h, s, a, b) under (mu, deterministic nu given as a
/// (t, state) -> action table), by forward recursion. Test-local.
fn occupancy_under_pure_min(
    game: &Game,
    mu: &Strategy,
    nu_pick: &[Vec<usize>],
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> f64 {
    let d = game.dims();
    let mut dist = vec![0.0; d.num_states];
    dist[d.initial_state] = 1.0;
    for t in 0..h {
        let mut next = vec![0.0; d.num_states];
        for x in 0..d.num_states {
            if dist[x] == 0.0 {
                continue;
            }
            let bb = nu_pick[t][x];
            for act in 0..d.num_actions_max {
                let w = dist[x] * mu.prob(t, x, act);
                if w == 0.0 {
                    continue;
                }
                for (x2, &p) in game.transition_row(t, x, act, bb).iter().enumerate() {
                    next[x2] += w * p;
                }
            }
        }
        dist = next;
    }
    if nu_pick[h][s] != b {
        return 0.0;
    }
    dist[s] * mu.prob(h, s, a)
}

/// `max_nu d_h^{mu,nu}(s,a,b)` by exhaustive enumeration over all
/// deterministic Markov min strategies. Exponential; only for tiny dims.
pub fn enumerate_min_deviations(
    game: &Game,
    mu: &Strategy,
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> f64 {
    let d = game.dims();
    let slots = d.horizon * d.num_states;
    let total = (d.num_actions_min as u64).pow(slots as u32);
    assert!(total <= 1 << 20, "enumeration too large");
    let mut best: f64 = 0.0;
    for code in 0..total {
        let mut c = code;
        let mut pick = vec![vec![0usize; d.num_states]; d.horizon];
        for t in 0..d.horizon {
            for x in 0..d.num_states {
                pick[t][x] = (c % d.num_actions_min as u64) as usize;
                c /= d.num_actions_min as u64;
            }
        }
        best = best.max(occupancy_under_pure_min(game, mu, &pick, h, s, a, b));
    }
    best
}

/// Exact occupancy of (h, s, a, b) under (deterministic mu given as a
/// (t, state) -> action table, fixed mixed nu), by forward recursion.
fn occupancy_under_pure_max(
    game: &Game,
    mu_pick: &[Vec<usize>],
    nu: &Strategy,
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> f64 {
    let d = game.dims();
    let mut dist = vec![0.0; d.num_states];
    dist[d.initial_state] = 1.0;
    for t in 0..h {
        let mut next = vec![0.0; d.num_states];
        for x in 0..d.num_states {
            if dist[x] == 0.0 {
                continue;
            }
            let aa = mu_pick[t][x];
            for bb in 0..d.num_actions_min {
                let w = dist[x] * nu.prob(t, x, bb);
                if w == 0.0 {
                    continue;
                }
                for (x2, &p) in game.transition_row(t, x, aa, bb).iter().enumerate() {
                    next[x2] += w * p;
                }
            }
        }
        dist = next;
    }
    if mu_pick[h][s] != a {
        return 0.0;
    }
    dist[s] * nu.prob(h, s, b)
}

/// `max_mu d_h^{mu,nu}(s,a,b)` by exhaustive enumeration over all
/// deterministic Markov max strategies.
pub fn enumerate_max_deviations(
    game: &Game,
    nu: &Strategy,
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> f64 {
    let d = game.dims();
    let slots = d.horizon * d.num_states;
    let total = (d.num_actions_max as u64).pow(slots as u32);
    assert!(total <= 1 << 20, "enumeration too large");
    let mut best: f64 = 0.0;
    for code in 0..total {
        let mut c = code;
        let mut pick = vec![vec![0usize; d.num_states]; d.horizon];
        for t in 0..d.horizon {
            for x in 0..d.num_states {
                pick[t][x] = (c % d.num_actions_max as u64) as usize;
                c /= d.num_actions_max as u64;
            }
        }
        best = best.max(occupancy_under_pure_max(game, &pick, nu, h, s, a, b));
    }
    best
}

/// Positive random strategy rows, normalized. Test-local helper.
pub fn random_strategy(
    seed: u64,
    player: offline_zsg::Player,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
) -> Strategy {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut strat = Strategy::uniform(player, horizon, num_states, num_actions);
    for h in 0..horizon {
        for s in 0..num_states {
            let mut row: Vec<f64> = (0..num_actions).map(|_| rng.random_range(0.05..1.0)).collect();
            let sum: f64 = row.iter().sum();
            for p in &mut row {
                *p /= sum;
            }
            strat.set_row(h, s, &row);
        }
    }
    strat
}
