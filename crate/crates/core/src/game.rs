//! Tabular two-player zero-sum Markov games and strategies.
//!
//! A game is the tuple (S, A, B, P, r, H) with a fixed initial state:
//! finite state space, one action set per player, per-timestep transition
//! kernels and deterministic rewards in [0, 1]. Indices are 0-based
//! everywhere, including timesteps.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Absolute tolerance for "sums to one" checks on probability vectors,
/// sized for binary64 round-off on normalized vectors.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// Dimensions of a game: state count, action counts, horizon, initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameDims {
    pub num_states: usize,
    pub num_actions_max: usize,
    pub num_actions_min: usize,
    pub horizon: usize,
    pub initial_state: usize,
}

impl GameDims {
    pub fn new(
        num_states: usize,
        num_actions_max: usize,
        num_actions_min: usize,
        horizon: usize,
        initial_state: usize,
    ) -> Result<Self> {
        let dims = GameDims {
            num_states,
            num_actions_max,
            num_actions_min,
            horizon,
            initial_state,
        };
        dims.check()?;
        Ok(dims)
    }

    pub(crate) fn check(&self) -> Result<()> {
        for (name, v) in [
            ("num_states", self.num_states),
            ("num_actions_max", self.num_actions_max),
            ("num_actions_min", self.num_actions_min),
            ("horizon", self.horizon),
        ] {
            if v == 0 {
                return Err(Error::InvalidDimension(format!("{name} must be positive")));
            }
        }
        if self.initial_state >= self.num_states {
            return Err(Error::InvalidDimension(format!(
                "initial_state {} out of range for {} states",
                self.initial_state, self.num_states
            )));
        }
        Ok(())
    }

    /// Cells per timestep: S*A*B.
    pub fn cells(&self) -> usize {
        self.num_states * self.num_actions_max * self.num_actions_min
    }
}

/// Which player a strategy belongs to. `Max` controls actions in A and
/// maximizes the total reward; `Min` controls B and minimizes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Max,
    Min,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Max => write!(f, "max"),
            Player::Min => write!(f, "min"),
        }
    }
}

/// A tabular zero-sum Markov game. Construction checks shapes only;
/// probabilistic invariants are reported by [`validate_game`], so
/// deliberately broken instances can exist as data.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    dims: GameDims,
    turn_based: bool,
    /// Rewards, row-major over (h, s, a, b).
    rewards: Vec<f64>,
    /// Transition kernels, row-major over (h, s, a, b, s').
    transitions: Vec<f64>,
}

impl Game {
    pub fn new(
        dims: GameDims,
        rewards: Vec<f64>,
        transitions: Vec<f64>,
        turn_based: bool,
    ) -> Result<Self> {
        dims.check()?;
        let cells = dims.horizon * dims.cells();
        if rewards.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "rewards has {} entries, expected {}",
                rewards.len(),
                cells
            )));
        }
        if transitions.len() != cells * dims.num_states {
            return Err(Error::DimensionMismatch(format!(
                "transitions has {} entries, expected {}",
                transitions.len(),
                cells * dims.num_states
            )));
        }
        Ok(Game {
            dims,
            turn_based,
            rewards,
            transitions,
        })
    }

    pub fn dims(&self) -> &GameDims {
        &self.dims
    }

    pub fn turn_based(&self) -> bool {
        self.turn_based
    }

    /// Returns the same game with the turn-based flag replaced. Only the
    /// equilibrium concept changes; the tensors are untouched.
    pub fn with_turn_based(mut self, turn_based: bool) -> Self {
        self.turn_based = turn_based;
        self
    }

    #[inline]
    fn cell_index(&self, h: usize, s: usize, a: usize, b: usize) -> usize {
        ((h * self.dims.num_states + s) * self.dims.num_actions_max + a) * self.dims.num_actions_min
            + b
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.rewards[self.cell_index(h, s, a, b)]
    }

    /// Probability vector over next states for one (h, s, a, b).
    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        let lo = self.cell_index(h, s, a, b) * self.dims.num_states;
        &self.transitions[lo..lo + self.dims.num_states]
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("game serialization cannot fail")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

/// One violated game invariant, locating the offending index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    TransitionSum {
        h: usize,
        s: usize,
        a: usize,
        b: usize,
        sum: f64,
    },
    TransitionEntry {
        h: usize,
        s: usize,
        a: usize,
        b: usize,
        next_state: usize,
        value: f64,
    },
    RewardRange {
        h: usize,
        s: usize,
        a: usize,
        b: usize,
        value: f64,
    },
    InitialState {
        initial_state: usize,
        num_states: usize,
    },
    Distribution {
        location: String,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TransitionSum { h, s, a, b, sum } => write!(
                f,
                "transition row ({h},{s},{a},{b}) sums to {sum} (must be 1 within {PROB_TOLERANCE})"
            ),
            Violation::TransitionEntry {
                h,
                s,
                a,
                b,
                next_state,
                value,
            } => write!(
                f,
                "transition entry ({h},{s},{a},{b} -> {next_state}) is {value} (must be in [0,1])"
            ),
            Violation::RewardRange { h, s, a, b, value } => {
                write!(f, "reward out of [0,1] at ({h},{s},{a},{b}): {value}")
            }
            Violation::InitialState {
                initial_state,
                num_states,
            } => write!(
                f,
                "initial state {initial_state} out of range for {num_states} states"
            ),
            Violation::Distribution { location, reason } => {
                write!(f, "invalid distribution at {location}: {reason}")
            }
        }
    }
}

/// Outcome of validating a game or strategy: empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "- {v}")?;
        }
        Ok(())
    }
}

/// Checks every game invariant: transition rows are probability vectors
/// (entries in [0,1], sum 1 within [`PROB_TOLERANCE`]), rewards lie in
/// [0,1], and the initial state is in range.
pub fn validate_game(game: &Game) -> ValidationReport {
    let dims = game.dims();
    let mut violations = Vec::new();
    if dims.initial_state >= dims.num_states {
        violations.push(Violation::InitialState {
            initial_state: dims.initial_state,
            num_states: dims.num_states,
        });
    }
    for h in 0..dims.horizon {
        for s in 0..dims.num_states {
            for a in 0..dims.num_actions_max {
                for b in 0..dims.num_actions_min {
                    let r = game.reward(h, s, a, b);
                    if !r.is_finite() || !(0.0..=1.0).contains(&r) {
                        violations.push(Violation::RewardRange { h, s, a, b, value: r });
                    }
                    let row = game.transition_row(h, s, a, b);
                    let mut sum = 0.0;
                    for (s2, &p) in row.iter().enumerate() {
                        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                            violations.push(Violation::TransitionEntry {
                                h,
                                s,
                                a,
                                b,
                                next_state: s2,
                                value: p,
                            });
                        }
                        sum += p;
                    }
                    if (sum - 1.0).abs() > PROB_TOLERANCE {
                        violations.push(Violation::TransitionSum { h, s, a, b, sum });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Returns `Some(reason)` when `row` is not a probability vector.
pub(crate) fn check_prob_row(row: &[f64]) -> Option<String> {
    let mut sum = 0.0;
    for (i, &p) in row.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Some(format!("entry {i} is {p}"));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Some(format!("sums to {sum}"));
    }
    None
}

/// Per-timestep, per-state action distributions for one player.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub player: Player,
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions: usize,
    /// Row-major over (h, s, action).
    probs: Vec<f64>,
}

impl Strategy {
    pub fn new(
        player: Player,
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if probs.len() != horizon * num_states * num_actions {
            return Err(Error::DimensionMismatch(format!(
                "strategy has {} entries, expected {}",
                probs.len(),
                horizon * num_states * num_actions
            )));
        }
        Ok(Strategy {
            player,
            horizon,
            num_states,
            num_actions,
            probs,
        })
    }

    pub fn uniform(player: Player, horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Strategy {
            player,
            horizon,
            num_states,
            num_actions,
            probs: vec![1.0 / num_actions as f64; horizon * num_states * num_actions],
        }
    }

    /// Deterministic strategy choosing `pick(h, s)` with probability 1.
    pub fn pure<F: Fn(usize, usize) -> usize>(
        player: Player,
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        pick: F,
    ) -> Self {
        let mut probs = vec![0.0; horizon * num_states * num_actions];
        for h in 0..horizon {
            for s in 0..num_states {
                let action = pick(h, s);
                probs[(h * num_states + s) * num_actions + action] = 1.0;
            }
        }
        Strategy {
            player,
            horizon,
            num_states,
            num_actions,
            probs,
        }
    }

    #[inline]
    pub fn prob(&self, h: usize, s: usize, action: usize) -> f64 {
        self.probs[(h * self.num_states + s) * self.num_actions + action]
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let lo = (h * self.num_states + s) * self.num_actions;
        &self.probs[lo..lo + self.num_actions]
    }

    pub fn set_row(&mut self, h: usize, s: usize, row: &[f64]) {
        let lo = (h * self.num_states + s) * self.num_actions;
        self.probs[lo..lo + self.num_actions].copy_from_slice(row);
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                if let Some(reason) = check_prob_row(self.row(h, s)) {
                    violations.push(Violation::Distribution {
                        location: format!("strategy[{h}][{s}]"),
                        reason,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// True when every (h, s) row is a point mass within `tol`.
    pub fn is_point_mass(&self, tol: f64) -> bool {
        (0..self.horizon).all(|h| {
            (0..self.num_states).all(|s| self.row(h, s).iter().any(|&p| p >= 1.0 - tol))
        })
    }
}

/// Min-player strategy that conditions on the max player's revealed
/// action, as allowed in turn-based games.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnBasedMinStrategy {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions_max: usize,
    pub num_actions_min: usize,
    /// Row-major over (h, s, a, b).
    probs: Vec<f64>,
}

impl TurnBasedMinStrategy {
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions_max: usize,
        num_actions_min: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if probs.len() != horizon * num_states * num_actions_max * num_actions_min {
            return Err(Error::DimensionMismatch(format!(
                "turn-based strategy has {} entries, expected {}",
                probs.len(),
                horizon * num_states * num_actions_max * num_actions_min
            )));
        }
        Ok(TurnBasedMinStrategy {
            horizon,
            num_states,
            num_actions_max,
            num_actions_min,
            probs,
        })
    }

    /// Deterministic reply `pick(h, s, a)` with probability 1.
    pub fn pure<F: Fn(usize, usize, usize) -> usize>(
        horizon: usize,
        num_states: usize,
        num_actions_max: usize,
        num_actions_min: usize,
        pick: F,
    ) -> Self {
        let mut probs = vec![0.0; horizon * num_states * num_actions_max * num_actions_min];
        for h in 0..horizon {
            for s in 0..num_states {
                for a in 0..num_actions_max {
                    let b = pick(h, s, a);
                    probs[((h * num_states + s) * num_actions_max + a) * num_actions_min + b] = 1.0;
                }
            }
        }
        TurnBasedMinStrategy {
            horizon,
            num_states,
            num_actions_max,
            num_actions_min,
            probs,
        }
    }

    #[inline]
    pub fn prob(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.probs[((h * self.num_states + s) * self.num_actions_max + a) * self.num_actions_min + b]
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize, a: usize) -> &[f64] {
        let lo = ((h * self.num_states + s) * self.num_actions_max + a) * self.num_actions_min;
        &self.probs[lo..lo + self.num_actions_min]
    }

    pub fn set_row(&mut self, h: usize, s: usize, a: usize, row: &[f64]) {
        let lo = ((h * self.num_states + s) * self.num_actions_max + a) * self.num_actions_min;
        self.probs[lo..lo + self.num_actions_min].copy_from_slice(row);
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                for a in 0..self.num_actions_max {
                    if let Some(reason) = check_prob_row(self.row(h, s, a)) {
                        violations.push(Violation::Distribution {
                            location: format!("strategy[{h}][{s}][{a}]"),
                            reason,
                        });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn is_point_mass(&self, tol: f64) -> bool {
        (0..self.horizon).all(|h| {
            (0..self.num_states).all(|s| {
                (0..self.num_actions_max)
                    .all(|a| self.row(h, s, a).iter().any(|&p| p >= 1.0 - tol))
            })
        })
    }
}

/// Min-player strategy in either form: state-conditioned (simultaneous
/// games) or state-and-action-conditioned (turn-based games).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MinStrategy {
    Simultaneous(Strategy),
    TurnBased(TurnBasedMinStrategy),
}

impl MinStrategy {
    pub fn validate(&self) -> ValidationReport {
        match self {
            MinStrategy::Simultaneous(s) => s.validate(),
            MinStrategy::TurnBased(s) => s.validate(),
        }
    }

    pub fn is_point_mass(&self, tol: f64) -> bool {
        match self {
            MinStrategy::Simultaneous(s) => s.is_point_mass(tol),
            MinStrategy::TurnBased(s) => s.is_point_mass(tol),
        }
    }

    /// Probability of `b` given the max player's action `a` (ignored for
    /// state-conditioned strategies).
    #[inline]
    pub fn prob_given(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        match self {
            MinStrategy::Simultaneous(strat) => strat.prob(h, s, b),
            MinStrategy::TurnBased(strat) => strat.prob(h, s, a, b),
        }
    }
}

impl From<Strategy> for MinStrategy {
    fn from(s: Strategy) -> Self {
        MinStrategy::Simultaneous(s)
    }
}

/// A strategy for each player. Serializes with the conventional field
/// names `mu` (max player) and `nu` (min player).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyPair {
    #[serde(rename = "mu")]
    pub max: Strategy,
    #[serde(rename = "nu")]
    pub min: MinStrategy,
}

impl StrategyPair {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("strategy serialization cannot fail");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

/// Marker confirming a game is flagged turn-based, so equilibrium
/// subroutines downstream use pure max-min solving and min-player outputs
/// condition on the max action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TurnBasedMode;

/// Fails unless the game is flagged turn-based. The stored tensors are
/// unchanged either way; only the equilibrium concept differs.
pub fn compile_turn_based(game: &Game) -> Result<TurnBasedMode> {
    if game.turn_based() {
        Ok(TurnBasedMode)
    } else {
        Err(Error::NotTurnBased)
    }
}

/// The two one-step bandit instances that differ only in the reward of
/// the action pair (a2, b1), plus the exploration policy that never
/// visits that pair. No dataset can tell the two games apart, yet their
/// equilibria are disjoint, so any learner is at least 0.25-suboptimal on
/// one of them.
pub fn make_hardness_pair() -> (Game, Game, crate::data::ExplorationPolicy) {
    let dims = GameDims {
        num_states: 1,
        num_actions_max: 2,
        num_actions_min: 2,
        horizon: 1,
        initial_state: 0,
    };
    // Rewards indexed (a, b): row a1 then a2.
    let rewards1 = vec![0.25, 0.5, 0.0, 0.75];
    let rewards2 = vec![0.25, 0.5, 1.0, 0.75];
    let transitions = vec![1.0; 4];
    let game1 = Game::new(dims, rewards1, transitions.clone(), false).expect("static instance");
    let game2 = Game::new(dims, rewards2, transitions, false).expect("static instance");
    let third = 1.0 / 3.0;
    let rho = crate::data::ExplorationPolicy::new(
        1,
        1,
        2,
        2,
        vec![third, third, 0.0, third],
    )
    .expect("static instance");
    (game1, game2, rho)
}

/// Seed-deterministic random game: transition rows are normalized
/// positive vectors (entries drawn uniform in [0.1, 1)), rewards uniform
/// in [0, 1). Always passes [`validate_game`].
pub fn random_game(
    seed: u64,
    num_states: usize,
    num_actions_max: usize,
    num_actions_min: usize,
    horizon: usize,
) -> Result<Game> {
    let dims = GameDims::new(num_states, num_actions_max, num_actions_min, horizon, 0)?;
    let mut rng = rng::seeded(seed);
    let cells = horizon * dims.cells();
    let mut rewards = Vec::with_capacity(cells);
    let mut transitions = Vec::with_capacity(cells * num_states);
    for _ in 0..cells {
        rewards.push(rng.random_range(0.0..1.0));
        let mut row: Vec<f64> = (0..num_states).map(|_| rng.random_range(0.1..1.0)).collect();
        let sum: f64 = row.iter().sum();
        for p in &mut row {
            *p /= sum;
        }
        transitions.extend_from_slice(&row);
    }
    Game::new(dims, rewards, transitions, false)
}

// --- serialization -------------------------------------------------------
//
// Game files are a single JSON document:
//   {"S","A","B","H","s1","turn_based","r":[h][s][a][b],"P":[h][s][a][b][s']}
// Strategies serialize analogously with a nested "dist" array.

#[derive(Serialize, Deserialize)]
struct GameFile {
    #[serde(rename = "S")]
    num_states: usize,
    #[serde(rename = "A")]
    num_actions_max: usize,
    #[serde(rename = "B")]
    num_actions_min: usize,
    #[serde(rename = "H")]
    horizon: usize,
    s1: usize,
    turn_based: bool,
    r: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

impl Serialize for Game {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dims();
        let mut r = Vec::with_capacity(d.horizon);
        let mut p = Vec::with_capacity(d.horizon);
        for h in 0..d.horizon {
            let mut rs = Vec::with_capacity(d.num_states);
            let mut ps = Vec::with_capacity(d.num_states);
            for s in 0..d.num_states {
                let mut ra = Vec::with_capacity(d.num_actions_max);
                let mut pa = Vec::with_capacity(d.num_actions_max);
                for a in 0..d.num_actions_max {
                    let mut rb = Vec::with_capacity(d.num_actions_min);
                    let mut pb = Vec::with_capacity(d.num_actions_min);
                    for b in 0..d.num_actions_min {
                        rb.push(self.reward(h, s, a, b));
                        pb.push(self.transition_row(h, s, a, b).to_vec());
                    }
                    ra.push(rb);
                    pa.push(pb);
                }
                rs.push(ra);
                ps.push(pa);
            }
            r.push(rs);
            p.push(ps);
        }
        GameFile {
            num_states: d.num_states,
            num_actions_max: d.num_actions_max,
            num_actions_min: d.num_actions_min,
            horizon: d.horizon,
            s1: d.initial_state,
            turn_based: self.turn_based,
            r,
            p,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Game {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let file = GameFile::deserialize(deserializer)?;
        let dims = GameDims::new(
            file.num_states,
            file.num_actions_max,
            file.num_actions_min,
            file.horizon,
            file.s1,
        )
        .map_err(D::Error::custom)?;
        let mut rewards = Vec::with_capacity(dims.horizon * dims.cells());
        let mut transitions = Vec::with_capacity(dims.horizon * dims.cells() * dims.num_states);
        if file.r.len() != dims.horizon || file.p.len() != dims.horizon {
            return Err(D::Error::custom("r/P horizon mismatch"));
        }
        for h in 0..dims.horizon {
            if file.r[h].len() != dims.num_states || file.p[h].len() != dims.num_states {
                return Err(D::Error::custom(format!("r/P state count mismatch at h={h}")));
            }
            for s in 0..dims.num_states {
                if file.r[h][s].len() != dims.num_actions_max
                    || file.p[h][s].len() != dims.num_actions_max
                {
                    return Err(D::Error::custom(format!(
                        "r/P max-action count mismatch at h={h}, s={s}"
                    )));
                }
                for a in 0..dims.num_actions_max {
                    if file.r[h][s][a].len() != dims.num_actions_min
                        || file.p[h][s][a].len() != dims.num_actions_min
                    {
                        return Err(D::Error::custom(format!(
                            "r/P min-action count mismatch at h={h}, s={s}, a={a}"
                        )));
                    }
                    for b in 0..dims.num_actions_min {
                        rewards.push(file.r[h][s][a][b]);
                        let row = &file.p[h][s][a][b];
                        if row.len() != dims.num_states {
                            return Err(D::Error::custom(format!(
                                "P row length mismatch at h={h}, s={s}, a={a}, b={b}"
                            )));
                        }
                        transitions.extend_from_slice(row);
                    }
                }
            }
        }
        Game::new(dims, rewards, transitions, file.turn_based).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyFile {
    player: Player,
    dist: Vec<Vec<Vec<f64>>>,
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dist = (0..self.horizon)
            .map(|h| (0..self.num_states).map(|s| self.row(h, s).to_vec()).collect())
            .collect();
        StrategyFile {
            player: self.player,
            dist,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let file = StrategyFile::deserialize(deserializer)?;
        let horizon = file.dist.len();
        let num_states = file.dist.first().map(|s| s.len()).unwrap_or(0);
        let num_actions = file
            .dist
            .first()
            .and_then(|s| s.first())
            .map(|r| r.len())
            .unwrap_or(0);
        if horizon == 0 || num_states == 0 || num_actions == 0 {
            return Err(D::Error::custom("empty strategy dist"));
        }
        let mut probs = Vec::with_capacity(horizon * num_states * num_actions);
        for (h, states) in file.dist.iter().enumerate() {
            if states.len() != num_states {
                return Err(D::Error::custom(format!("ragged dist at h={h}")));
            }
            for (s, row) in states.iter().enumerate() {
                if row.len() != num_actions {
                    return Err(D::Error::custom(format!("ragged dist at h={h}, s={s}")));
                }
                probs.extend_from_slice(row);
            }
        }
        Strategy::new(file.player, horizon, num_states, num_actions, probs)
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn random_games_validate_clean() {
        let game = random_game(1, 3, 2, 2, 3).unwrap();
        let report = validate_game(&game);
        assert!(report.is_valid(), "unexpected violations: {report}");
    }

    #[test]
    fn broken_transition_row_is_reported_with_its_index() {
        let game = random_game(1, 3, 2, 2, 3).unwrap();
        let dims = *game.dims();
        let mut transitions: Vec<f64> = Vec::new();
        for h in 0..dims.horizon {
            for s in 0..dims.num_states {
                for a in 0..dims.num_actions_max {
                    for b in 0..dims.num_actions_min {
                        transitions.extend_from_slice(game.transition_row(h, s, a, b));
                    }
                }
            }
        }
        // Break the row at (h=1, s=2, a=1, b=0) so it sums to 0.99.
        let (h, s, a, b) = (1, 2, 1, 0);
        let row_start = ((((h * 3 + s) * 2 + a) * 2) + b) * 3;
        transitions[row_start] -= 0.01;
        let rewards = (0..dims.horizon * dims.cells())
            .map(|_| 0.5)
            .collect::<Vec<_>>();
        let broken = Game::new(dims, rewards, transitions, false).unwrap();
        let report = validate_game(&broken);
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::TransitionSum { h, s, a, b, sum } => {
                assert_eq!((*h, *s, *a, *b), (1, 2, 1, 0));
                assert!((sum - 0.99).abs() < 1e-9);
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn out_of_range_reward_is_reported() {
        let dims = GameDims::new(1, 2, 2, 1, 0).unwrap();
        let mut rewards = vec![0.5; 4];
        rewards[0] = 1.5;
        let game = Game::new(dims, rewards, vec![1.0; 4], false).unwrap();
        let report = validate_game(&game);
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("reward out of [0,1]"));
        match &report.violations[0] {
            Violation::RewardRange { h, s, a, b, .. } => {
                assert_eq!((*h, *s, *a, *b), (0, 0, 0, 0))
            }
            other => panic!("unexpected violation {other:?}"),
        }
    }

    #[test]
    fn hardness_pair_matches_the_tables() {
        let (game1, game2, rho) = make_hardness_pair();
        assert_eq!(game1.reward(0, 0, 0, 0), 0.25);
        assert_eq!(game1.reward(0, 0, 0, 1), 0.5);
        assert_eq!(game1.reward(0, 0, 1, 0), 0.0);
        assert_eq!(game1.reward(0, 0, 1, 1), 0.75);
        assert_eq!(game2.reward(0, 0, 1, 0), 1.0);
        assert_eq!(rho.joint_prob(0, 0, 1, 0), 0.0);
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            assert!((rho.joint_prob(0, 0, a, b) - 1.0 / 3.0).abs() < 1e-15);
        }
        // The two games differ in exactly one reward entry.
        let mut diffs = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                if game1.reward(0, 0, a, b) != game2.reward(0, 0, a, b) {
                    diffs.push((a, b));
                }
            }
        }
        assert_eq!(diffs, vec![(1, 0)]);
        assert!(validate_game(&game1).is_valid());
        assert!(validate_game(&game2).is_valid());
        assert!(rho.validate().is_valid());
    }

    #[test]
    fn random_game_is_deterministic_in_seed() {
        let a = random_game(9, 4, 3, 2, 5).unwrap();
        let b = random_game(9, 4, 3, 2, 5).unwrap();
        let c = random_game(10, 4, 3, 2, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_game_rejects_zero_dimensions() {
        assert!(matches!(
            random_game(1, 0, 2, 2, 3),
            Err(Error::InvalidDimension(_))
        ));
        assert!(matches!(
            random_game(1, 3, 2, 2, 0),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn compile_turn_based_requires_the_flag() {
        let (game1, _, _) = make_hardness_pair();
        assert!(matches!(
            compile_turn_based(&game1),
            Err(Error::NotTurnBased)
        ));
        let tb = game1.with_turn_based(true);
        assert!(compile_turn_based(&tb).is_ok());
    }

    #[test]
    fn game_json_round_trip_is_bit_exact() {
        let game = random_game(42, 3, 2, 2, 3).unwrap();
        let text = game.to_json_string();
        let back: Game = serde_json::from_str(&text).unwrap();
        assert_eq!(game, back);
        for h in 0..3 {
            for s in 0..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert_eq!(
                            game.reward(h, s, a, b).to_bits(),
                            back.reward(h, s, a, b).to_bits()
                        );
                        for s2 in 0..3 {
                            assert_eq!(
                                game.transition_row(h, s, a, b)[s2].to_bits(),
                                back.transition_row(h, s, a, b)[s2].to_bits()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn strategy_json_round_trip() {
        let strat = Strategy::uniform(Player::Min, 2, 3, 2);
        let text = serde_json::to_string(&strat).unwrap();
        assert!(text.contains("\"player\":\"min\""));
        let back: Strategy = serde_json::from_str(&text).unwrap();
        assert_eq!(strat, back);
    }

    #[test]
    fn min_strategy_untagged_round_trip() {
        let sim = MinStrategy::Simultaneous(Strategy::uniform(Player::Min, 2, 2, 3));
        let tb = MinStrategy::TurnBased(TurnBasedMinStrategy::pure(2, 2, 2, 3, |_, _, a| a % 3));
        for strat in [sim, tb] {
            let text = serde_json::to_string(&strat).unwrap();
            let back: MinStrategy = serde_json::from_str(&text).unwrap();
            assert_eq!(strat, back);
        }
    }

    #[test]
    fn point_mass_detection() {
        let pure = Strategy::pure(Player::Max, 2, 2, 3, |h, s| (h + s) % 3);
        assert!(pure.is_point_mass(1e-9));
        assert!(!Strategy::uniform(Player::Max, 2, 2, 3).is_point_mass(1e-9));
    }
}

#[derive(Serialize, Deserialize)]
struct TurnBasedMinFile {
    dist: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Serialize for TurnBasedMinStrategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dist = (0..self.horizon)
            .map(|h| {
                (0..self.num_states)
                    .map(|s| {
                        (0..self.num_actions_max)
                            .map(|a| self.row(h, s, a).to_vec())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TurnBasedMinFile { dist }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TurnBasedMinStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let file = TurnBasedMinFile::deserialize(deserializer)?;
        let horizon = file.dist.len();
        let num_states = file.dist.first().map(|s| s.len()).unwrap_or(0);
        let num_actions_max = file
            .dist
            .first()
            .and_then(|s| s.first())
            .map(|a| a.len())
            .unwrap_or(0);
        let num_actions_min = file
            .dist
            .first()
            .and_then(|s| s.first())
            .and_then(|a| a.first())
            .map(|r| r.len())
            .unwrap_or(0);
        if horizon == 0 || num_states == 0 || num_actions_max == 0 || num_actions_min == 0 {
            return Err(D::Error::custom("empty turn-based strategy dist"));
        }
        let mut probs = Vec::with_capacity(horizon * num_states * num_actions_max * num_actions_min);
        for (h, states) in file.dist.iter().enumerate() {
            if states.len() != num_states {
                return Err(D::Error::custom(format!("ragged dist at h={h}")));
            }
            for (s, actions) in states.iter().enumerate() {
                if actions.len() != num_actions_max {
                    return Err(D::Error::custom(format!("ragged dist at h={h}, s={s}")));
                }
                for (a, row) in actions.iter().enumerate() {
                    if row.len() != num_actions_min {
                        return Err(D::Error::custom(format!(
                            "ragged dist at h={h}, s={s}, a={a}"
                        )));
                    }
                    probs.extend_from_slice(row);
                }
            }
        }
        TurnBasedMinStrategy::new(horizon, num_states, num_actions_max, num_actions_min, probs)
            .map_err(D::Error::custom)
    }
}
