//! Shared fixtures and oracles for the harness tests.
//!
//! The fixture game is the frozen instance behind the pessimism and rate
//! experiments: three states with strictly mixed stage equilibria, the
//! third state high-reward and rarely reached, with entry probabilities
//! that depend strongly on the joint action. The fixture exploration
//! policy skews visit counts across action pairs while covering
//! everything.

// Each test binary compiles this module; not every binary uses every helper.
#![allow(dead_code)]

use offline_zsg::{ExplorationPolicy, Game, GameDims};

pub const FIXTURE_S: usize = 3;
pub const FIXTURE_A: usize = 2;
pub const FIXTURE_B: usize = 2;
pub const FIXTURE_H: usize = 3;

/// The fixed game used by the pessimism and rate criteria.
pub fn fixture_game() -> Game {
    let dims = GameDims::new(FIXTURE_S, FIXTURE_A, FIXTURE_B, FIXTURE_H, 0).unwrap();
    let pattern = [[1.0, -1.0], [-0.8, 0.9]];
    let base = [0.35, 0.5, 0.92];
    let spread = [0.3, 0.25, 0.06];
    // Probability of entering the high-value state, per joint action.
    let jackpot = [[0.01, 0.12], [0.30, 0.05]];
    let mut rewards = Vec::new();
    let mut transitions = Vec::new();
    for _h in 0..FIXTURE_H {
        for s in 0..FIXTURE_S {
            for a in 0..FIXTURE_A {
                for b in 0..FIXTURE_B {
                    let raw: f64 = base[s] + spread[s] * pattern[a][b];
                    rewards.push(raw.clamp(0.0, 1.0));
                    let p2: f64 = jackpot[a][b];
                    let rest = 1.0 - p2;
                    let w0 = if (s + a) % 2 == 0 { 0.55 } else { 0.4 };
                    transitions.push(rest * w0);
                    transitions.push(rest * (1.0 - w0));
                    transitions.push(p2);
                }
            }
        }
    }
    Game::new(dims, rewards, transitions, false).unwrap()
}

/// Skewed exploration policy for the rate experiment: joint-action
/// weights (0.40, 0.25, 0.20, 0.15) at every (h, s).
pub fn fixture_skewed_rho() -> ExplorationPolicy {
    let weights = [0.40, 0.25, 0.20, 0.15];
    let mut probs = Vec::new();
    for _h in 0..FIXTURE_H {
        for _s in 0..FIXTURE_S {
            probs.extend_from_slice(&weights);
        }
    }
    ExplorationPolicy::new(FIXTURE_H, FIXTURE_S, FIXTURE_A, FIXTURE_B, probs).unwrap()
}

/// Bernstein bonus constant for the frozen experiments (large enough
/// that the variance-adapted bonus, not the estimation-noise floor,
/// drives the gap).
pub const FIXTURE_C: f64 = 2.5;

// --- deterministic test randomness ----------------------------------------

/// splitmix64; good enough to fabricate test strategies without pulling
/// a generator dependency into the test crate.
pub struct Mixer(pub u64);

impl Mixer {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Positive random strategy rows, normalized.
pub fn random_strategy(
    seed: u64,
    player: offline_zsg::Player,
    horizon: usize,
    num_states: usize,
    num_actions: usize,
) -> offline_zsg::Strategy {
    let mut mixer = Mixer(seed);
    let mut strat = offline_zsg::Strategy::uniform(player, horizon, num_states, num_actions);
    for h in 0..horizon {
        for s in 0..num_states {
            let mut row: Vec<f64> = (0..num_actions).map(|_| mixer.uniform(0.05, 1.0)).collect();
            let total: f64 = row.iter().sum();
            for p in &mut row {
                *p /= total;
            }
            strat.set_row(h, s, &row);
        }
    }
    strat
}

// --- grid oracle (independent of the LP solver) --------------------------

fn worst_column_payoff(q: &[Vec<f64>], mu: &[f64]) -> f64 {
    let cols = q[0].len();
    (0..cols)
        .map(|b| mu.iter().enumerate().map(|(a, &p)| p * q[a][b]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Game value of a 2-row payoff table by 1-D grid search with local
/// refinement.
pub fn grid_matrix_value_2(q: &[Vec<f64>]) -> f64 {
    assert_eq!(q.len(), 2, "grid oracle expects 2 rows");
    let mut best = f64::NEG_INFINITY;
    let mut best_p = 0.0;
    let mut i = 0;
    while i <= 100 {
        let p = i as f64 / 100.0;
        let v = worst_column_payoff(q, &[p, 1.0 - p]);
        if v > best {
            best = v;
            best_p = p;
        }
        i += 1;
    }
    let lo = (best_p - 0.012f64).max(0.0);
    let hi = (best_p + 0.012f64).min(1.0);
    let mut p = lo;
    while p <= hi {
        let v = worst_column_payoff(q, &[p, 1.0 - p]);
        if v > best {
            best = v;
        }
        p += 1e-4;
    }
    best
}

/// Equilibrium value of a game by backward induction with grid-solved
/// stages. Only valid for 2-action max players.
pub fn grid_backward_induction_value(game: &Game) -> f64 {
    let d = game.dims();
    assert_eq!(d.num_actions_max, 2);
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
            v[s] = grid_matrix_value_2(&q);
        }
        v_next = v;
    }
    v_next[d.initial_state]
}
