//! Reproduces the indistinguishability lower bound: one dataset, two
//! games that generated it equally well, and learners whose single output
//! must be wrong on at least one of them.

use anyhow::{ensure, Result};
use serde::{Deserialize, Serialize};

use offline_zsg::{
    duality_gap, empirical_model, make_hardness_pair, run_bernstein, run_hoeffding,
    sample_dataset,
};

use crate::config::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessRow {
    pub algorithm: Algorithm,
    pub gap_game1: f64,
    pub gap_game2: f64,
    pub sum: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub n: usize,
    pub seed: u64,
    pub delta: f64,
    pub c: f64,
    pub rows: Vec<HardnessRow>,
    /// The empirical models built from game-1 and game-2 samples with the
    /// same seed are bit-identical (the games differ only on a pair the
    /// exploration policy never plays).
    pub models_identical: bool,
}

pub const HARDNESS_SUM_BOUND: f64 = 0.5 - 1e-6;
pub const HARDNESS_MAX_BOUND: f64 = 0.25 - 1e-6;

impl HardnessReport {
    /// True when every learner hit the information-theoretic floor:
    /// summed gaps at least 0.5 and worst gap at least 0.25 (up to 1e-6).
    pub fn passes(&self) -> bool {
        self.models_identical
            && self
                .rows
                .iter()
                .all(|r| r.sum >= HARDNESS_SUM_BOUND && r.max >= HARDNESS_MAX_BOUND)
    }
}

/// Samples one dataset from (game 1, hardness policy), runs each learner
/// once on it, and evaluates the single output against both games.
pub fn reproduce_hardness(
    n: usize,
    seed: u64,
    delta: f64,
    c: f64,
    eps_ne: f64,
) -> Result<HardnessReport> {
    ensure!(n >= 3, "hardness reproduction needs n >= 3, got {n}");
    let (game1, game2, rho) = make_hardness_pair();
    let ds1 = sample_dataset(&game1, &rho, n, seed)?;
    let ds2 = sample_dataset(&game2, &rho, n, seed)?;
    let all: Vec<usize> = (0..n).collect();
    let models_identical = empirical_model(&ds1, &all) == empirical_model(&ds2, &all);

    let mut rows = Vec::new();
    for algorithm in [Algorithm::Hoeffding, Algorithm::Bernstein] {
        let pair = match algorithm {
            Algorithm::Hoeffding => run_hoeffding(&ds1, false, delta, eps_ne, seed)?
                .learner
                .strategy_pair(),
            Algorithm::Bernstein => run_bernstein(&ds1, false, delta, c, eps_ne, seed)?
                .learner
                .strategy_pair(),
        };
        let gap_game1 = duality_gap(&game1, &pair)?;
        let gap_game2 = duality_gap(&game2, &pair)?;
        rows.push(HardnessRow {
            algorithm,
            gap_game1,
            gap_game2,
            sum: gap_game1 + gap_game2,
            max: gap_game1.max(gap_game2),
        });
    }
    Ok(HardnessReport {
        n,
        seed,
        delta,
        c,
        rows,
        models_identical,
    })
}
