//! Experiment harness for the offline zero-sum Markov game toolkit:
//! configuration, seeded sweeps with CSV output, rate fitting, the
//! indistinguishability reproduction, and coverage diagnosis.

pub mod config;
pub mod hardness;
pub mod rate;
pub mod sweep;

pub use config::{
    resolve_game, resolve_rho, with_worker_pool, Algorithm, AlgorithmChoice, ExperimentConfig,
    GameSource, EXACT_EPS_NE, LEARNER_EPS_NE,
};
pub use hardness::{reproduce_hardness, HardnessReport, HardnessRow};
pub use rate::{fit_loglog_slope, median, RateFit};
pub use sweep::{read_sweep_csv, run_sweep, write_sweep_csv, SweepResult, SweepRow};
