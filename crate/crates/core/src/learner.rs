//! Shared machinery of the offline learners: the backward pass that
//! turns per-stage pessimistic/optimistic state-action tables into value
//! envelopes and strategies by solving one matrix equilibrium per state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{solve_stage_ne, StageNe};
use crate::exec;
use crate::game::{GameDims, MinStrategy, Player, Strategy, TurnBasedMinStrategy};
use crate::tables::{QTable, ValueTables};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    /// Episodes feeding this stage's statistics.
    pub episodes: usize,
    /// Cells with zero visits at this stage.
    pub unvisited_cells: usize,
    pub max_bonus: f64,
    pub mean_bonus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub delta: f64,
    pub iota: f64,
    pub eps_ne: f64,
    pub stages: Vec<StageDiagnostics>,
}

/// Output common to both learners: the max player's strategy from the
/// lower envelope, the min player's from the upper envelope, and both
/// envelopes. The envelopes satisfy `0 <= Q_low <= Q_up <= H - h` and
/// `V_low <= V_up` on every dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerOutput {
    #[serde(rename = "mu")]
    pub max_strategy: Strategy,
    #[serde(rename = "nu")]
    pub min_strategy: MinStrategy,
    pub v_low: ValueTables,
    pub v_up: ValueTables,
    pub q_low: QTable,
    pub q_up: QTable,
    pub diagnostics: Diagnostics,
}

impl LearnerOutput {
    pub fn strategy_pair(&self) -> crate::game::StrategyPair {
        crate::game::StrategyPair {
            max: self.max_strategy.clone(),
            min: self.min_strategy.clone(),
        }
    }
}

/// Accumulates the backward pass: callers feed clamped per-stage tables
/// from `h = H-1` down to `0`; each stage is solved state by state.
pub(crate) struct BackwardPass {
    dims: GameDims,
    turn_based: bool,
    eps_ne: f64,
    pub v_low: ValueTables,
    pub v_up: ValueTables,
    q_low: QTable,
    q_up: QTable,
    max_strategy: Strategy,
    min_sim: Strategy,
    min_tb: TurnBasedMinStrategy,
}

impl BackwardPass {
    pub fn new(dims: GameDims, turn_based: bool, eps_ne: f64) -> Self {
        BackwardPass {
            dims,
            turn_based,
            eps_ne,
            v_low: ValueTables::zeros(&dims),
            v_up: ValueTables::zeros(&dims),
            q_low: QTable::zeros(&dims),
            q_up: QTable::zeros(&dims),
            max_strategy: Strategy::uniform(
                Player::Max,
                dims.horizon,
                dims.num_states,
                dims.num_actions_max,
            ),
            min_sim: Strategy::uniform(
                Player::Min,
                dims.horizon,
                dims.num_states,
                dims.num_actions_min,
            ),
            min_tb: TurnBasedMinStrategy::pure(
                dims.horizon,
                dims.num_states,
                dims.num_actions_max,
                dims.num_actions_min,
                |_, _, _| 0,
            ),
        }
    }

    /// Solves stage `h` from the clamped tables (laid out (s, a, b)):
    /// the max strategy and lower values come from the lower table, the
    /// min strategy and upper values from the upper one.
    pub fn record_stage(&mut self, h: usize, q_low_stage: &[f64], q_up_stage: &[f64]) -> Result<()> {
        let d = &self.dims;
        let ab = d.num_actions_max * d.num_actions_min;
        let turn_based = self.turn_based;
        let eps_ne = self.eps_ne;
        let solved: Vec<(StageNe, StageNe)> = exec::map_indexed(d.num_states, |s| {
            let lo = solve_stage_ne(
                &q_low_stage[s * ab..(s + 1) * ab],
                d.num_actions_max,
                d.num_actions_min,
                eps_ne,
                turn_based,
            )
            .map_err(|e| Error::Stage {
                h,
                s,
                source: Box::new(e),
            })?;
            let up = solve_stage_ne(
                &q_up_stage[s * ab..(s + 1) * ab],
                d.num_actions_max,
                d.num_actions_min,
                eps_ne,
                turn_based,
            )
            .map_err(|e| Error::Stage {
                h,
                s,
                source: Box::new(e),
            })?;
            Ok((lo, up))
        })
        .into_iter()
        .collect::<Result<_>>()?;

        for (s, (lo, up)) in solved.iter().enumerate() {
            self.v_low.set_v(h, s, lo.value());
            self.v_up.set_v(h, s, up.value());
            match lo {
                StageNe::Mixed { max_row, .. } => self.max_strategy.set_row(h, s, max_row),
                StageNe::Pure { max_action, .. } => {
                    let mut row = vec![0.0; d.num_actions_max];
                    row[*max_action] = 1.0;
                    self.max_strategy.set_row(h, s, &row);
                }
            }
            match up {
                StageNe::Mixed { min_row, .. } => self.min_sim.set_row(h, s, min_row),
                StageNe::Pure { min_reply, .. } => {
                    for (a, &reply) in min_reply.iter().enumerate() {
                        let mut row = vec![0.0; d.num_actions_min];
                        row[reply] = 1.0;
                        self.min_tb.set_row(h, s, a, &row);
                    }
                }
            }
        }
        let lo_dst = self.q_low.index(h, 0, 0, 0);
        self.q_low.data[lo_dst..lo_dst + q_low_stage.len()].copy_from_slice(q_low_stage);
        let up_dst = self.q_up.index(h, 0, 0, 0);
        self.q_up.data[up_dst..up_dst + q_up_stage.len()].copy_from_slice(q_up_stage);
        Ok(())
    }

    pub fn finish(self, diagnostics: Diagnostics) -> LearnerOutput {
        let min_strategy = if self.turn_based {
            MinStrategy::TurnBased(self.min_tb)
        } else {
            MinStrategy::Simultaneous(self.min_sim)
        };
        LearnerOutput {
            max_strategy: self.max_strategy,
            min_strategy,
            v_low: self.v_low,
            v_up: self.v_up,
            q_low: self.q_low,
            q_up: self.q_up,
            diagnostics,
        }
    }
}

/// `iota = ln(H S A B / delta)`, the log factor shared by both bonus
/// families. Natural logarithm.
pub fn log_factor(dims: &GameDims, delta: f64) -> f64 {
    ((dims.horizon * dims.cells()) as f64 / delta).ln()
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )))
    }
}

pub(crate) fn check_eps_ne(eps_ne: f64) -> Result<()> {
    if eps_ne > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "eps_ne must be positive, got {eps_ne}"
        )))
    }
}
