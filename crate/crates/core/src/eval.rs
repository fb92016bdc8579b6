//! Ground-truth machinery: exact equilibrium solving by backward
//! induction, best-response dynamic programming, duality gap, occupancy
//! measures, and dataset-coverage diagnostics.

use serde::{Deserialize, Serialize};

use crate::data::ExplorationPolicy;
use crate::error::{Error, Result};
use crate::exec;
use crate::game::{Game, GameDims, MinStrategy, Player, Strategy, StrategyPair, TurnBasedMinStrategy};
use crate::matrix::{solve_matrix_game, solve_maxmin_pure, Matrix};
use crate::tables::{QTable, ValueTables};

/// Occupancy below this threshold counts as "not covered" (binary64
/// underflow guard for the coverage booleans and ratio conventions).
pub const COVERAGE_TOLERANCE: f64 = 1e-12;

/// Per-state equilibrium of one stage matrix.
#[derive(Debug, Clone)]
pub(crate) enum StageNe {
    Mixed {
        value: f64,
        max_row: Vec<f64>,
        min_row: Vec<f64>,
    },
    Pure {
        value: f64,
        max_action: usize,
        min_reply: Vec<usize>,
    },
}

impl StageNe {
    pub(crate) fn value(&self) -> f64 {
        match self {
            StageNe::Mixed { value, .. } => *value,
            StageNe::Pure { value, .. } => *value,
        }
    }
}

/// Solves the `A x B` stage matrix at one state: mixed equilibrium via
/// the LP solver, or pure max-min when the game is turn-based.
pub(crate) fn solve_stage_ne(
    stage: &[f64],
    num_actions_max: usize,
    num_actions_min: usize,
    eps_ne: f64,
    turn_based: bool,
) -> Result<StageNe> {
    let q = Matrix::new(num_actions_max, num_actions_min, stage.to_vec())?;
    if turn_based {
        let sol = solve_maxmin_pure(&q)?;
        Ok(StageNe::Pure {
            value: sol.value,
            max_action: sol.best_row,
            min_reply: sol.column_reply,
        })
    } else {
        let sol = solve_matrix_game(&q, eps_ne)?;
        Ok(StageNe::Mixed {
            value: sol.value,
            max_row: sol.max_strategy,
            min_row: sol.min_strategy,
        })
    }
}

/// Expected continuation `r + P . V_next` for every (s, a, b) of stage `h`.
fn stage_action_values(game: &Game, h: usize, v_next: &[f64]) -> Vec<f64> {
    let d = game.dims();
    let mut q = Vec::with_capacity(d.cells());
    for s in 0..d.num_states {
        for a in 0..d.num_actions_max {
            for b in 0..d.num_actions_min {
                let p = game.transition_row(h, s, a, b);
                let cont: f64 = p.iter().zip(v_next).map(|(pi, vi)| pi * vi).sum();
                q.push(game.reward(h, s, a, b) + cont);
            }
        }
    }
    q
}

/// Runs backward induction, solving one matrix equilibrium per state and
/// stage. Returns an equilibrium strategy pair and its value tables; for
/// turn-based games the strategies are pure and the min player's
/// strategy conditions on the max action.
pub fn nash_vi(game: &Game, eps_ne: f64) -> Result<(StrategyPair, ValueTables)> {
    let d = *game.dims();
    let mut values = ValueTables::zeros(&d);
    let mut q_table = QTable::zeros(&d);
    let mut max_strategy = Strategy::uniform(Player::Max, d.horizon, d.num_states, d.num_actions_max);
    let mut min_sim = Strategy::uniform(Player::Min, d.horizon, d.num_states, d.num_actions_min);
    let mut min_tb = TurnBasedMinStrategy::pure(
        d.horizon,
        d.num_states,
        d.num_actions_max,
        d.num_actions_min,
        |_, _, _| 0,
    );

    let ab = d.num_actions_max * d.num_actions_min;
    for h in (0..d.horizon).rev() {
        let stage_q = stage_action_values(game, h, values.stage(h + 1));
        let solved: Vec<StageNe> = exec::map_indexed(d.num_states, |s| {
            solve_stage_ne(
                &stage_q[s * ab..(s + 1) * ab],
                d.num_actions_max,
                d.num_actions_min,
                eps_ne,
                game.turn_based(),
            )
        })
        .into_iter()
        .collect::<Result<_>>()?;
        for s in 0..d.num_states {
            values.set_v(h, s, solved[s].value());
            match &solved[s] {
                StageNe::Mixed { max_row, min_row, .. } => {
                    max_strategy.set_row(h, s, max_row);
                    min_sim.set_row(h, s, min_row);
                }
                StageNe::Pure {
                    max_action,
                    min_reply,
                    ..
                } => {
                    let mut row = vec![0.0; d.num_actions_max];
                    row[*max_action] = 1.0;
                    max_strategy.set_row(h, s, &row);
                    for (a, &reply) in min_reply.iter().enumerate() {
                        let mut brow = vec![0.0; d.num_actions_min];
                        brow[reply] = 1.0;
                        min_tb.set_row(h, s, a, &brow);
                    }
                }
            }
        }
        for s in 0..d.num_states {
            for a in 0..d.num_actions_max {
                for b in 0..d.num_actions_min {
                    q_table.set(h, s, a, b, stage_q[(s * d.num_actions_max + a) * d.num_actions_min + b]);
                }
            }
        }
    }
    values.action_values = Some(q_table);
    let min = if game.turn_based() {
        MinStrategy::TurnBased(min_tb)
    } else {
        MinStrategy::Simultaneous(min_sim)
    };
    Ok((
        StrategyPair {
            max: max_strategy,
            min,
        },
        values,
    ))
}

/// Best response of the max player to a fixed min strategy, with its
/// value tables (the induced-MDP optimum, computed exactly by backward
/// induction; argmax ties break toward the lowest index).
#[derive(Debug, Clone)]
pub struct BestResponse {
    pub values: ValueTables,
    pub strategy: Strategy,
}

/// Best response of the min player to a fixed max strategy. In
/// turn-based games the reply conditions on the max player's action.
#[derive(Debug, Clone)]
pub struct MinBestResponse {
    pub values: ValueTables,
    pub strategy: MinStrategy,
}

fn check_strategy(report: crate::game::ValidationReport, what: &str) -> Result<()> {
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidDistribution {
            location: what.to_string(),
            reason: report.to_string(),
        })
    }
}

fn check_min_dims(game: &Game, min: &MinStrategy) -> Result<()> {
    let d = game.dims();
    let ok = match min {
        MinStrategy::Simultaneous(s) => {
            s.player == Player::Min
                && s.horizon == d.horizon
                && s.num_states == d.num_states
                && s.num_actions == d.num_actions_min
        }
        MinStrategy::TurnBased(s) => {
            s.horizon == d.horizon
                && s.num_states == d.num_states
                && s.num_actions_max == d.num_actions_max
                && s.num_actions_min == d.num_actions_min
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(
            "min strategy does not match the game".into(),
        ))
    }
}

fn check_max_dims(game: &Game, max: &Strategy) -> Result<()> {
    let d = game.dims();
    if max.player == Player::Max
        && max.horizon == d.horizon
        && max.num_states == d.num_states
        && max.num_actions == d.num_actions_max
    {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(
            "max strategy does not match the game".into(),
        ))
    }
}

/// `V^{*,nu}`: the max player's optimal value against a fixed `nu`.
pub fn max_best_response(game: &Game, min: &MinStrategy) -> Result<BestResponse> {
    check_min_dims(game, min)?;
    check_strategy(min.validate(), "min strategy")?;
    let d = *game.dims();
    let mut values = ValueTables::zeros(&d);
    let mut strategy = Strategy::uniform(Player::Max, d.horizon, d.num_states, d.num_actions_max);
    for h in (0..d.horizon).rev() {
        for s in 0..d.num_states {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..d.num_actions_max {
                let mut q = 0.0;
                for b in 0..d.num_actions_min {
                    let w = min.prob_given(h, s, a, b);
                    if w == 0.0 {
                        continue;
                    }
                    let p = game.transition_row(h, s, a, b);
                    let cont: f64 = p
                        .iter()
                        .zip(values.stage(h + 1))
                        .map(|(pi, vi)| pi * vi)
                        .sum();
                    q += w * (game.reward(h, s, a, b) + cont);
                }
                if q > best {
                    best = q;
                    best_a = a;
                }
            }
            values.set_v(h, s, best);
            let mut row = vec![0.0; d.num_actions_max];
            row[best_a] = 1.0;
            strategy.set_row(h, s, &row);
        }
    }
    Ok(BestResponse { values, strategy })
}

/// `V^{mu,*}`: the min player's optimal value against a fixed `mu`. For
/// turn-based games the min player observes the max action, so the reply
/// minimizes per (state, action); otherwise it minimizes the mixture.
pub fn min_best_response(game: &Game, max: &Strategy) -> Result<MinBestResponse> {
    check_max_dims(game, max)?;
    check_strategy(max.validate(), "max strategy")?;
    let d = *game.dims();
    let mut values = ValueTables::zeros(&d);
    if game.turn_based() {
        let mut reply = TurnBasedMinStrategy::pure(
            d.horizon,
            d.num_states,
            d.num_actions_max,
            d.num_actions_min,
            |_, _, _| 0,
        );
        for h in (0..d.horizon).rev() {
            for s in 0..d.num_states {
                let mut total = 0.0;
                for a in 0..d.num_actions_max {
                    let weight = max.prob(h, s, a);
                    let mut best = f64::INFINITY;
                    let mut best_b = 0;
                    for b in 0..d.num_actions_min {
                        let p = game.transition_row(h, s, a, b);
                        let cont: f64 = p
                            .iter()
                            .zip(values.stage(h + 1))
                            .map(|(pi, vi)| pi * vi)
                            .sum();
                        let q = game.reward(h, s, a, b) + cont;
                        if q < best {
                            best = q;
                            best_b = b;
                        }
                    }
                    let mut row = vec![0.0; d.num_actions_min];
                    row[best_b] = 1.0;
                    reply.set_row(h, s, a, &row);
                    total += weight * best;
                }
                values.set_v(h, s, total);
            }
        }
        Ok(MinBestResponse {
            values,
            strategy: MinStrategy::TurnBased(reply),
        })
    } else {
        let mut reply = Strategy::uniform(Player::Min, d.horizon, d.num_states, d.num_actions_min);
        for h in (0..d.horizon).rev() {
            for s in 0..d.num_states {
                let mut best = f64::INFINITY;
                let mut best_b = 0;
                for b in 0..d.num_actions_min {
                    let mut q = 0.0;
                    for a in 0..d.num_actions_max {
                        let w = max.prob(h, s, a);
                        if w == 0.0 {
                            continue;
                        }
                        let p = game.transition_row(h, s, a, b);
                        let cont: f64 = p
                            .iter()
                            .zip(values.stage(h + 1))
                            .map(|(pi, vi)| pi * vi)
                            .sum();
                        q += w * (game.reward(h, s, a, b) + cont);
                    }
                    if q < best {
                        best = q;
                        best_b = b;
                    }
                }
                values.set_v(h, s, best);
                let mut row = vec![0.0; d.num_actions_min];
                row[best_b] = 1.0;
                reply.set_row(h, s, &row);
            }
        }
        Ok(MinBestResponse {
            values,
            strategy: MinStrategy::Simultaneous(reply),
        })
    }
}

/// Duality gap of a strategy pair:
/// `V_1^{*,nu}(s1) - V_1^{mu,*}(s1)`. Nonnegative up to round-off; zero
/// exactly at equilibrium.
pub fn duality_gap(game: &Game, pair: &StrategyPair) -> Result<f64> {
    let s1 = game.dims().initial_state;
    let upper = max_best_response(game, &pair.min)?.values.at_start(s1);
    let lower = min_best_response(game, &pair.max)?.values.at_start(s1);
    Ok(upper - lower)
}

/// Exact value tables of a fixed strategy pair (policy evaluation).
pub fn pair_value(game: &Game, pair: &StrategyPair) -> Result<ValueTables> {
    check_max_dims(game, &pair.max)?;
    check_min_dims(game, &pair.min)?;
    let d = *game.dims();
    let mut values = ValueTables::zeros(&d);
    for h in (0..d.horizon).rev() {
        for s in 0..d.num_states {
            let mut total = 0.0;
            for a in 0..d.num_actions_max {
                let wa = pair.max.prob(h, s, a);
                if wa == 0.0 {
                    continue;
                }
                for b in 0..d.num_actions_min {
                    let w = wa * pair.min.prob_given(h, s, a, b);
                    if w == 0.0 {
                        continue;
                    }
                    let p = game.transition_row(h, s, a, b);
                    let cont: f64 = p
                        .iter()
                        .zip(values.stage(h + 1))
                        .map(|(pi, vi)| pi * vi)
                        .sum();
                    total += w * (game.reward(h, s, a, b) + cont);
                }
            }
            values.set_v(h, s, total);
        }
    }
    Ok(values)
}

/// Anything that induces a joint action distribution per (h, s):
/// exploration policies directly, strategy pairs as a product.
pub trait JointPolicy {
    fn joint_prob(&self, h: usize, s: usize, a: usize, b: usize) -> f64;
    fn check_dims(&self, dims: &GameDims) -> Result<()>;
}

impl JointPolicy for ExplorationPolicy {
    fn joint_prob(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        ExplorationPolicy::joint_prob(self, h, s, a, b)
    }

    fn check_dims(&self, dims: &GameDims) -> Result<()> {
        if self.horizon == dims.horizon
            && self.num_states == dims.num_states
            && self.num_actions_max == dims.num_actions_max
            && self.num_actions_min == dims.num_actions_min
        {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                "exploration policy dimensions do not match the game".into(),
            ))
        }
    }
}

impl JointPolicy for StrategyPair {
    fn joint_prob(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.max.prob(h, s, a) * self.min.prob_given(h, s, a, b)
    }

    fn check_dims(&self, dims: &GameDims) -> Result<()> {
        let max_ok = self.max.horizon == dims.horizon
            && self.max.num_states == dims.num_states
            && self.max.num_actions == dims.num_actions_max;
        if !max_ok {
            return Err(Error::DimensionMismatch(
                "max strategy does not match the game".into(),
            ));
        }
        match &self.min {
            MinStrategy::Simultaneous(s) => {
                if s.horizon == dims.horizon
                    && s.num_states == dims.num_states
                    && s.num_actions == dims.num_actions_min
                {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch(
                        "min strategy does not match the game".into(),
                    ))
                }
            }
            MinStrategy::TurnBased(s) => {
                if s.horizon == dims.horizon
                    && s.num_states == dims.num_states
                    && s.num_actions_max == dims.num_actions_max
                    && s.num_actions_min == dims.num_actions_min
                {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch(
                        "min strategy does not match the game".into(),
                    ))
                }
            }
        }
    }
}

/// Per-timestep visit distribution over (s, a, b).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions_max: usize,
    pub num_actions_min: usize,
    /// Row-major over (h, s, a, b).
    pub data: Vec<f64>,
}

impl Occupancy {
    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.data
            [((h * self.num_states + s) * self.num_actions_max + a) * self.num_actions_min + b]
    }

    /// Total mass at timestep `h` (1 up to round-off).
    pub fn stage_sum(&self, h: usize) -> f64 {
        let cells = self.num_states * self.num_actions_max * self.num_actions_min;
        self.data[h * cells..(h + 1) * cells].iter().sum()
    }

    /// Smallest cell mass over all (h, s, a, b).
    pub fn min_cell(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }
}

/// Forward recursion for the visit distribution of a policy from the
/// fixed initial state.
pub fn occupancy<P: JointPolicy>(game: &Game, policy: &P) -> Result<Occupancy> {
    let d = *game.dims();
    policy.check_dims(&d)?;
    let mut state_dist = vec![0.0; d.num_states];
    state_dist[d.initial_state] = 1.0;
    let mut data = Vec::with_capacity(d.horizon * d.cells());
    for h in 0..d.horizon {
        let mut next = vec![0.0; d.num_states];
        for s in 0..d.num_states {
            let mass = state_dist[s];
            for a in 0..d.num_actions_max {
                for b in 0..d.num_actions_min {
                    let cell = mass * policy.joint_prob(h, s, a, b);
                    data.push(cell);
                    if cell > 0.0 {
                        for (s2, &p) in game.transition_row(h, s, a, b).iter().enumerate() {
                            next[s2] += cell * p;
                        }
                    }
                }
            }
        }
        state_dist = next;
    }
    Ok(Occupancy {
        horizon: d.horizon,
        num_states: d.num_states,
        num_actions_max: d.num_actions_max,
        num_actions_min: d.num_actions_min,
        data,
    })
}

/// Which side stays fixed at its equilibrium strategy while the other
/// deviates arbitrarily.
#[derive(Debug, Clone, Copy)]
pub enum FixedSide<'a> {
    Max(&'a Strategy),
    Min(&'a MinStrategy),
}

/// Deterministic deviating-player choices that maximize the probability
/// of standing at a target state at a target timestep.
struct ReachPlan {
    reach: f64,
    /// Chosen deviator action per (t, state) for t before the target
    /// timestep. For the turn-based min deviator the choice also
    /// conditions on the max action: picks_tb[t][state][a].
    picks: Vec<Vec<usize>>,
    picks_tb: Option<Vec<Vec<Vec<usize>>>>,
}

/// Max over min-player deviations of the reach probability of
/// (target_h, target_s) with `mu` fixed. Deterministic Markov deviations
/// attain the maximum (any mixture is a convex combination of them).
fn reach_min_deviates(game: &Game, mu: &Strategy, target_h: usize, target_s: usize) -> ReachPlan {
    let d = game.dims();
    let mut value = vec![0.0; d.num_states];
    value[target_s] = 1.0;
    let mut picks = vec![vec![0usize; d.num_states]; target_h];
    let mut picks_tb = if game.turn_based() {
        Some(vec![vec![vec![0usize; d.num_actions_max]; d.num_states]; target_h])
    } else {
        None
    };
    for t in (0..target_h).rev() {
        let mut next_value = vec![0.0; d.num_states];
        for s in 0..d.num_states {
            if game.turn_based() {
                // The deviator sees the max action and replies per action.
                let mut total = 0.0;
                for a in 0..d.num_actions_max {
                    let wa = mu.prob(t, s, a);
                    let mut best = f64::NEG_INFINITY;
                    let mut best_b = 0;
                    for b in 0..d.num_actions_min {
                        let reach: f64 = game
                            .transition_row(t, s, a, b)
                            .iter()
                            .zip(&value)
                            .map(|(p, v)| p * v)
                            .sum();
                        if reach > best {
                            best = reach;
                            best_b = b;
                        }
                    }
                    picks_tb.as_mut().unwrap()[t][s][a] = best_b;
                    total += wa * best;
                }
                next_value[s] = total;
            } else {
                let mut best = f64::NEG_INFINITY;
                let mut best_b = 0;
                for b in 0..d.num_actions_min {
                    let mut reach = 0.0;
                    for a in 0..d.num_actions_max {
                        let wa = mu.prob(t, s, a);
                        if wa == 0.0 {
                            continue;
                        }
                        let p: f64 = game
                            .transition_row(t, s, a, b)
                            .iter()
                            .zip(&value)
                            .map(|(p, v)| p * v)
                            .sum();
                        reach += wa * p;
                    }
                    if reach > best {
                        best = reach;
                        best_b = b;
                    }
                }
                picks[t][s] = best_b;
                next_value[s] = best;
            }
        }
        value = next_value;
    }
    ReachPlan {
        reach: value[d.initial_state],
        picks,
        picks_tb,
    }
}

/// Max over max-player deviations of the reach probability of
/// (target_h, target_s) with `nu` fixed.
fn reach_max_deviates(game: &Game, nu: &MinStrategy, target_h: usize, target_s: usize) -> ReachPlan {
    let d = game.dims();
    let mut value = vec![0.0; d.num_states];
    value[target_s] = 1.0;
    let mut picks = vec![vec![0usize; d.num_states]; target_h];
    for t in (0..target_h).rev() {
        let mut next_value = vec![0.0; d.num_states];
        for s in 0..d.num_states {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..d.num_actions_max {
                let mut reach = 0.0;
                for b in 0..d.num_actions_min {
                    let wb = nu.prob_given(t, s, a, b);
                    if wb == 0.0 {
                        continue;
                    }
                    let p: f64 = game
                        .transition_row(t, s, a, b)
                        .iter()
                        .zip(&value)
                        .map(|(p, v)| p * v)
                        .sum();
                    reach += wb * p;
                }
                if reach > best {
                    best = reach;
                    best_a = a;
                }
            }
            picks[t][s] = best_a;
            next_value[s] = best;
        }
        value = next_value;
    }
    ReachPlan {
        reach: value[d.initial_state],
        picks,
        picks_tb: None,
    }
}

/// Maximum occupancy of the cell (h, s, a, b) over all deviations of the
/// non-fixed player: `max_nu d_h^{mu,nu}(s,a,b)` when the max side is
/// fixed, `max_mu d_h^{mu,nu}(s,a,b)` when the min side is fixed. Exact,
/// attained by a deterministic deviation.
pub fn max_unilateral_occupancy(
    game: &Game,
    fixed: FixedSide<'_>,
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> Result<f64> {
    let d = game.dims();
    if h >= d.horizon || s >= d.num_states || a >= d.num_actions_max || b >= d.num_actions_min {
        return Err(Error::DimensionMismatch("cell index out of range".into()));
    }
    Ok(match fixed {
        FixedSide::Max(mu) => {
            check_max_dims(game, mu)?;
            reach_min_deviates(game, mu, h, s).reach * mu.prob(h, s, a)
        }
        FixedSide::Min(nu) => {
            check_min_dims(game, nu)?;
            reach_max_deviates(game, nu, h, s).reach * nu.prob_given(h, s, a, b)
        }
    })
}

/// A concrete deviating deterministic strategy exhibiting a reachable but
/// uncovered cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviationStrategy {
    Max(Strategy),
    Min(MinStrategy),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageWitness {
    pub deviator: Player,
    pub timestep: usize,
    pub state: usize,
    pub action_max: usize,
    pub action_min: usize,
    pub strategy: DeviationStrategy,
}

mod serde_maybe_infinite {
    //! JSON has no literal for infinity; an infinite value round-trips
    //! as `null`.
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            serializer.serialize_some(v)
        } else {
            serializer.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::INFINITY))
    }
}

/// Dataset-coverage diagnostics for one game, exploration policy, and
/// equilibrium pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Worst ratio of unilateral-deviation occupancy to dataset
    /// occupancy; at least 1 when finite, infinite when some reachable
    /// deviation cell has no data.
    #[serde(with = "serde_maybe_infinite")]
    pub c_star: f64,
    /// Smallest dataset occupancy over all (h, s, a, b).
    pub d_m: f64,
    /// The equilibrium pair's own occupancy is covered.
    pub assumption1_holds: bool,
    /// Every one-sided deviation from the equilibrium is covered.
    pub assumption2_holds: bool,
    /// Every cell has positive dataset mass.
    pub assumption3_holds: bool,
    pub witness: Option<CoverageWitness>,
    /// Scope note for the ratio computation.
    pub metadata: String,
}

impl CoverageReport {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn witness_max_deviation(
    game: &Game,
    plan: &ReachPlan,
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> CoverageWitness {
    let d = game.dims();
    let strategy = Strategy::pure(Player::Max, d.horizon, d.num_states, d.num_actions_max, |t, x| {
        if t < h {
            plan.picks[t][x]
        } else if t == h && x == s {
            a
        } else {
            0
        }
    });
    CoverageWitness {
        deviator: Player::Max,
        timestep: h,
        state: s,
        action_max: a,
        action_min: b,
        strategy: DeviationStrategy::Max(strategy),
    }
}

fn witness_min_deviation(
    game: &Game,
    plan: &ReachPlan,
    h: usize,
    s: usize,
    a: usize,
    b: usize,
) -> CoverageWitness {
    let d = game.dims();
    let strategy = if let Some(tb) = &plan.picks_tb {
        let reply = TurnBasedMinStrategy::pure(
            d.horizon,
            d.num_states,
            d.num_actions_max,
            d.num_actions_min,
            |t, x, act| {
                if t < h {
                    tb[t][x][act]
                } else if t == h && x == s {
                    b
                } else {
                    0
                }
            },
        );
        MinStrategy::TurnBased(reply)
    } else {
        MinStrategy::Simultaneous(Strategy::pure(
            Player::Min,
            d.horizon,
            d.num_states,
            d.num_actions_min,
            |t, x| {
                if t < h {
                    plan.picks[t][x]
                } else if t == h && x == s {
                    b
                } else {
                    0
                }
            },
        ))
    };
    CoverageWitness {
        deviator: Player::Min,
        timestep: h,
        state: s,
        action_max: a,
        action_min: b,
        strategy: DeviationStrategy::Min(strategy),
    }
}

/// Computes the coverage diagnostics: the concentrability of one-sided
/// deviations against the dataset distribution (ratio conventions
/// 0/0 := 0, positive/0 := infinity), the minimum dataset mass, the three
/// coverage assumptions, and a deviating witness when some reachable
/// deviation cell is uncovered.
///
/// The ratio is computed for the supplied equilibrium pair only; it is
/// not minimized over all equilibria of the game.
pub fn coverage_report(
    game: &Game,
    rho: &ExplorationPolicy,
    pair: &StrategyPair,
) -> Result<CoverageReport> {
    let d = *game.dims();
    let d_rho = occupancy(game, rho)?;
    let d_pair = occupancy(game, pair)?;
    let d_m = d_rho.min_cell();
    let assumption3 = d_m > COVERAGE_TOLERANCE;

    let mut assumption1 = true;
    for h in 0..d.horizon {
        for s in 0..d.num_states {
            for a in 0..d.num_actions_max {
                for b in 0..d.num_actions_min {
                    if d_pair.get(h, s, a, b) > COVERAGE_TOLERANCE
                        && d_rho.get(h, s, a, b) <= COVERAGE_TOLERANCE
                    {
                        assumption1 = false;
                    }
                }
            }
        }
    }

    let mut c_star: f64 = 0.0;
    let mut witness = None;
    for h in 0..d.horizon {
        for s in 0..d.num_states {
            let min_dev = reach_min_deviates(game, &pair.max, h, s);
            let max_dev = reach_max_deviates(game, &pair.min, h, s);
            for a in 0..d.num_actions_max {
                for b in 0..d.num_actions_min {
                    let denom = d_rho.get(h, s, a, b);
                    // Max side fixed, min deviates.
                    let lo_num = min_dev.reach * pair.max.prob(h, s, a);
                    if lo_num > COVERAGE_TOLERANCE {
                        if denom > COVERAGE_TOLERANCE {
                            c_star = c_star.max(lo_num / denom);
                        } else {
                            c_star = f64::INFINITY;
                            if witness.is_none() {
                                witness = Some(witness_min_deviation(game, &min_dev, h, s, a, b));
                            }
                        }
                    }
                    // Min side fixed, max deviates.
                    let up_num = max_dev.reach * pair.min.prob_given(h, s, a, b);
                    if up_num > COVERAGE_TOLERANCE {
                        if denom > COVERAGE_TOLERANCE {
                            c_star = c_star.max(up_num / denom);
                        } else {
                            c_star = f64::INFINITY;
                            if witness.is_none() {
                                witness = Some(witness_max_deviation(game, &max_dev, h, s, a, b));
                            }
                        }
                    }
                }
            }
        }
    }
    let assumption2 = c_star.is_finite();
    Ok(CoverageReport {
        c_star,
        d_m,
        assumption1_holds: assumption1,
        assumption2_holds: assumption2,
        assumption3_holds: assumption3,
        witness,
        metadata: "c_star computed for the supplied equilibrium pair only; \
                   not minimized over all equilibria"
            .into(),
    })
}
