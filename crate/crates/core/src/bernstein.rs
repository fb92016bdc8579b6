//! Offline pessimistic Nash value iteration with variance-adapted
//! (Bernstein-style) bonuses and a reference-advantage decomposition.
//!
//! The dataset is split three ways: a reference part learns coarse value
//! envelopes with the Hoeffding learner; a main part estimates the
//! transition operator applied to those reference values; per-stage parts
//! estimate the operator applied to the (small) advantage between the
//! evolving values and the reference. Each estimate carries a bonus
//! scaled by its empirical variance, and updates are truncated by the
//! reference envelopes so they only ever tighten them.

use serde::{Deserialize, Serialize};

use crate::data::{empirical_model, split_three_way, OfflineDataset};
use crate::error::{Error, Result};
use crate::exec;
use crate::hoeffding::run_hoeffding_on_parts;
use crate::learner::{
    check_delta, check_eps_ne, log_factor, BackwardPass, Diagnostics, LearnerOutput,
    StageDiagnostics,
};
use crate::rng;
use crate::tables::{QTable, ValueTables};

/// Variance of `values` under the distribution `p_row`:
/// `sum p v^2 - (sum p v)^2`, clamped at 0 against round-off.
pub fn variance_under(p_row: &[f64], values: &[f64]) -> f64 {
    let mean: f64 = p_row.iter().zip(values).map(|(p, v)| p * v).sum();
    let second: f64 = p_row.iter().zip(values).map(|(p, v)| p * v * v).sum();
    (second - mean * mean).max(0.0)
}

/// `c (sqrt(Var_{P_hat}(V) iota / (n ∨ 1)) + H iota / (n ∨ 1))` per cell.
/// `p_rows` holds one probability row of length `values.len()` per count.
pub fn bernstein_bonus(
    counts: &[u64],
    p_rows: &[f64],
    values: &[f64],
    c: f64,
    iota: f64,
    horizon: usize,
) -> Vec<f64> {
    let s = values.len();
    counts
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let var = variance_under(&p_rows[i * s..(i + 1) * s], values);
            let n = n.max(1) as f64;
            c * ((var * iota / n).sqrt() + horizon as f64 * iota / n)
        })
        .collect()
}

/// The coarse envelopes learned on the reference part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub v_low: ValueTables,
    pub v_up: ValueTables,
    pub q_low: QTable,
    pub q_up: QTable,
}

/// The four bonus tables and the constant that scales them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinBonuses {
    /// Reference-part bonus for the lower envelope.
    pub lower_reference: QTable,
    /// Reference-part bonus for the upper envelope.
    pub upper_reference: QTable,
    /// Advantage-part bonus for the lower envelope.
    pub lower_advantage: QTable,
    /// Advantage-part bonus for the upper envelope.
    pub upper_advantage: QTable,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinOutput {
    #[serde(flatten)]
    pub learner: LearnerOutput,
    pub reference: ReferenceValues,
    pub bonuses: BernsteinBonuses,
}

/// Runs the variance-adapted learner. Requires `n >= 3H` episodes. Two
/// sub-seeds are derived from `seed` in fixed order: one for the
/// three-way split shuffle, one for the reference run's internal
/// stagewise split.
pub fn run_bernstein(
    ds: &OfflineDataset,
    turn_based: bool,
    delta: f64,
    c: f64,
    eps_ne: f64,
    seed: u64,
) -> Result<BernsteinOutput> {
    check_delta(delta)?;
    check_eps_ne(eps_ne)?;
    if c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bonus constant c must be positive, got {c}"
        )));
    }
    let dims = *ds.dims();
    let split = split_three_way(ds, rng::sub_seed(seed, 0))?;

    // Reference envelopes from an independent part. The reference part
    // has floor(n/3) >= H episodes, so its own stagewise split succeeds.
    let reference_parts = partition_slice(&split.reference, dims.horizon, rng::sub_seed(seed, 1));
    let reference_run = run_hoeffding_on_parts(ds, &reference_parts, turn_based, delta, eps_ne)?;
    let reference = ReferenceValues {
        v_low: reference_run.learner.v_low.clone(),
        v_up: reference_run.learner.v_up.clone(),
        q_low: reference_run.learner.q_low.clone(),
        q_up: reference_run.learner.q_up.clone(),
    };

    let main_model = empirical_model(ds, &split.main);
    let stage_models: Vec<_> =
        exec::map_indexed(dims.horizon, |h| empirical_model(ds, &split.per_stage[h]));

    let iota = log_factor(&dims, delta);
    let cells = dims.cells();
    let (s_n, a_n, b_n) = (dims.num_states, dims.num_actions_max, dims.num_actions_min);

    let collect_stage = |model: &crate::data::EmpiricalModel, h: usize| {
        let mut counts = Vec::with_capacity(cells);
        let mut rows = Vec::with_capacity(cells * s_n);
        for s in 0..s_n {
            for a in 0..a_n {
                for b in 0..b_n {
                    counts.push(model.count(h, s, a, b));
                    rows.extend_from_slice(model.transition_row(h, s, a, b));
                }
            }
        }
        (counts, rows)
    };

    // Reference-part bonuses depend only on fixed quantities, so they are
    // set up front; advantage-part bonuses depend on the evolving values
    // and are recomputed inside the backward loop.
    let mut bonuses = BernsteinBonuses {
        lower_reference: QTable::zeros(&dims),
        upper_reference: QTable::zeros(&dims),
        lower_advantage: QTable::zeros(&dims),
        upper_advantage: QTable::zeros(&dims),
        c,
    };
    for h in 0..dims.horizon {
        let (counts, rows) = collect_stage(&main_model, h);
        let b_low = bernstein_bonus(
            &counts,
            &rows,
            reference.v_low.stage(h + 1),
            c,
            iota,
            dims.horizon,
        );
        let b_up = bernstein_bonus(
            &counts,
            &rows,
            reference.v_up.stage(h + 1),
            c,
            iota,
            dims.horizon,
        );
        let lo = bonuses.lower_reference.index(h, 0, 0, 0);
        bonuses.lower_reference.data[lo..lo + cells].copy_from_slice(&b_low);
        bonuses.upper_reference.data[lo..lo + cells].copy_from_slice(&b_up);
    }

    let mut stage_diags = vec![
        StageDiagnostics {
            episodes: 0,
            unvisited_cells: 0,
            max_bonus: 0.0,
            mean_bonus: 0.0,
        };
        dims.horizon
    ];
    let mut pass = BackwardPass::new(dims, turn_based, eps_ne);
    for h in (0..dims.horizon).rev() {
        let (stage_counts, stage_rows) = collect_stage(&stage_models[h], h);
        let advantage_low: Vec<f64> = pass
            .v_low
            .stage(h + 1)
            .iter()
            .zip(reference.v_low.stage(h + 1))
            .map(|(v, r)| v - r)
            .collect();
        let advantage_up: Vec<f64> = pass
            .v_up
            .stage(h + 1)
            .iter()
            .zip(reference.v_up.stage(h + 1))
            .map(|(v, r)| v - r)
            .collect();
        let b1_low = bernstein_bonus(&stage_counts, &stage_rows, &advantage_low, c, iota, dims.horizon);
        let b1_up = bernstein_bonus(&stage_counts, &stage_rows, &advantage_up, c, iota, dims.horizon);
        let lo = bonuses.lower_advantage.index(h, 0, 0, 0);
        bonuses.lower_advantage.data[lo..lo + cells].copy_from_slice(&b1_low);
        bonuses.upper_advantage.data[lo..lo + cells].copy_from_slice(&b1_up);

        let mut q_low_stage = Vec::with_capacity(cells);
        let mut q_up_stage = Vec::with_capacity(cells);
        let v_ref_low_next = reference.v_low.stage(h + 1);
        let v_ref_up_next = reference.v_up.stage(h + 1);
        let mut cell = 0;
        for s in 0..s_n {
            for a in 0..a_n {
                for b in 0..b_n {
                    let r0 = main_model.reward(h, s, a, b);
                    let p0 = main_model.transition_row(h, s, a, b);
                    let p1 = stage_models[h].transition_row(h, s, a, b);
                    let ref_low_cont: f64 =
                        p0.iter().zip(v_ref_low_next).map(|(p, v)| p * v).sum();
                    let ref_up_cont: f64 = p0.iter().zip(v_ref_up_next).map(|(p, v)| p * v).sum();
                    let adv_low_cont: f64 =
                        p1.iter().zip(&advantage_low).map(|(p, v)| p * v).sum();
                    let adv_up_cont: f64 = p1.iter().zip(&advantage_up).map(|(p, v)| p * v).sum();
                    let b0_low = bonuses.lower_reference.get(h, s, a, b);
                    let b0_up = bonuses.upper_reference.get(h, s, a, b);
                    let low = r0 + ref_low_cont - b0_low + adv_low_cont - b1_low[cell];
                    let up = r0 + ref_up_cont + b0_up + adv_up_cont + b1_up[cell];
                    // Truncation by the reference keeps updates monotone:
                    // the refined envelopes can only tighten the coarse ones.
                    q_low_stage.push(reference.q_low.get(h, s, a, b).max(low));
                    q_up_stage.push(reference.q_up.get(h, s, a, b).min(up));
                    cell += 1;
                }
            }
        }
        pass.record_stage(h, &q_low_stage, &q_up_stage)?;

        let total_bonus: f64 = (0..cells)
            .map(|i| {
                bonuses.lower_reference.data[bonuses.lower_reference.index(h, 0, 0, 0) + i]
                    + b1_low[i]
            })
            .sum();
        let max_bonus = (0..cells)
            .map(|i| {
                bonuses.lower_reference.data[bonuses.lower_reference.index(h, 0, 0, 0) + i]
                    + b1_low[i]
            })
            .fold(0.0f64, f64::max);
        stage_diags[h] = StageDiagnostics {
            episodes: split.per_stage[h].len(),
            unvisited_cells: stage_counts.iter().filter(|&&n| n == 0).count(),
            max_bonus,
            mean_bonus: total_bonus / cells as f64,
        };
    }

    let diagnostics = Diagnostics {
        delta,
        iota,
        eps_ne,
        stages: stage_diags,
    };
    Ok(BernsteinOutput {
        learner: pass.finish(diagnostics),
        reference,
        bonuses,
    })
}

/// Shuffles the given episode indices and cuts them into `horizon`
/// blocks of equal size (surplus discarded).
fn partition_slice(indices: &[usize], horizon: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut shuffled = indices.to_vec();
    shuffled.shuffle(&mut rng::seeded(seed));
    let part = shuffled.len() / horizon;
    (0..horizon)
        .map(|k| shuffled[k * part..(k + 1) * part].to_vec())
        .collect()
}
