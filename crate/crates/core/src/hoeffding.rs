//! Offline pessimistic Nash value iteration with Hoeffding-style
//! confidence bonuses.
//!
//! The dataset is split into `H` disjoint parts, one per timestep, so the
//! value estimate entering stage `h` is independent of the statistics at
//! stage `h`. A backward pass then maintains a lower envelope for the max
//! player (bonus subtracted, clamped at 0) and an upper envelope for the
//! min player (bonus added, clamped at the remaining horizon), solving
//! one matrix equilibrium per state and stage.

use serde::{Deserialize, Serialize};

use crate::data::{empirical_model, split_stagewise, OfflineDataset};
use crate::error::Result;
use crate::exec;
use crate::learner::{
    check_delta, check_eps_ne, log_factor, BackwardPass, Diagnostics, LearnerOutput,
    StageDiagnostics,
};
use crate::tables::QTable;

/// `4 H sqrt(iota / (n ∨ 1))` per cell.
pub fn hoeffding_bonus(counts: &[u64], horizon: usize, iota: f64) -> Vec<f64> {
    counts
        .iter()
        .map(|&n| 4.0 * horizon as f64 * (iota / (n.max(1) as f64)).sqrt())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingOutput {
    #[serde(flatten)]
    pub learner: LearnerOutput,
    /// The per-cell bonus table (identical for both envelopes).
    pub bonus: QTable,
}

/// Runs the Hoeffding-bonus learner on a dataset. `turn_based` selects
/// pure max-min solving per state (the dataset itself is agnostic);
/// `seed` drives the stagewise split shuffle; everything downstream is
/// deterministic.
pub fn run_hoeffding(
    ds: &OfflineDataset,
    turn_based: bool,
    delta: f64,
    eps_ne: f64,
    seed: u64,
) -> Result<HoeffdingOutput> {
    let parts = split_stagewise(ds, seed)?;
    run_hoeffding_on_parts(ds, &parts, turn_based, delta, eps_ne)
}

/// Core pass over an explicit stagewise partition (episode indices per
/// stage). Used directly by the reference step of the Bernstein learner.
pub(crate) fn run_hoeffding_on_parts(
    ds: &OfflineDataset,
    parts: &[Vec<usize>],
    turn_based: bool,
    delta: f64,
    eps_ne: f64,
) -> Result<HoeffdingOutput> {
    check_delta(delta)?;
    check_eps_ne(eps_ne)?;
    let dims = *ds.dims();
    let iota = log_factor(&dims, delta);
    let models: Vec<_> = exec::map_indexed(dims.horizon, |h| empirical_model(ds, &parts[h]));

    let cells = dims.cells();
    let mut bonus = QTable::zeros(&dims);
    let mut stage_diags = Vec::with_capacity(dims.horizon);
    for h in 0..dims.horizon {
        let mut counts = Vec::with_capacity(cells);
        for s in 0..dims.num_states {
            for a in 0..dims.num_actions_max {
                for b in 0..dims.num_actions_min {
                    counts.push(models[h].count(h, s, a, b));
                }
            }
        }
        let stage_bonus = hoeffding_bonus(&counts, dims.horizon, iota);
        let lo = bonus.index(h, 0, 0, 0);
        bonus.data[lo..lo + cells].copy_from_slice(&stage_bonus);
        stage_diags.push(StageDiagnostics {
            episodes: parts[h].len(),
            unvisited_cells: counts.iter().filter(|&&n| n == 0).count(),
            max_bonus: stage_bonus.iter().fold(0.0f64, |m, &b| m.max(b)),
            mean_bonus: stage_bonus.iter().sum::<f64>() / cells as f64,
        });
    }

    let mut pass = BackwardPass::new(dims, turn_based, eps_ne);
    for h in (0..dims.horizon).rev() {
        let model = &models[h];
        let cap = (dims.horizon - h) as f64;
        let mut q_low_stage = Vec::with_capacity(cells);
        let mut q_up_stage = Vec::with_capacity(cells);
        let v_low_next: Vec<f64> = pass.v_low.stage(h + 1).to_vec();
        let v_up_next: Vec<f64> = pass.v_up.stage(h + 1).to_vec();
        for s in 0..dims.num_states {
            for a in 0..dims.num_actions_max {
                for b in 0..dims.num_actions_min {
                    let r = model.reward(h, s, a, b);
                    let p = model.transition_row(h, s, a, b);
                    let low_cont: f64 = p.iter().zip(&v_low_next).map(|(pi, vi)| pi * vi).sum();
                    let up_cont: f64 = p.iter().zip(&v_up_next).map(|(pi, vi)| pi * vi).sum();
                    let b_hsab = bonus.get(h, s, a, b);
                    q_low_stage.push((r + low_cont - b_hsab).max(0.0));
                    q_up_stage.push((r + up_cont + b_hsab).min(cap));
                }
            }
        }
        pass.record_stage(h, &q_low_stage, &q_up_stage)?;
    }

    let diagnostics = Diagnostics {
        delta,
        iota,
        eps_ne,
        stages: stage_diags,
    };
    Ok(HoeffdingOutput {
        learner: pass.finish(diagnostics),
        bonus,
    })
}
