//! Tabular two-player zero-sum Markov games: exact equilibrium solving,
//! offline dataset generation, and pessimistic offline equilibrium
//! learners with certified diagnostics.
//!
//! The crate is organized around the pipeline
//! `game -> exploration policy -> offline dataset -> learner -> exact
//! evaluation`:
//!
//! * [`game`] defines games, strategies, validation, the paired
//!   indistinguishable bandit instances, and JSON (de)serialization;
//! * [`matrix`] solves one-shot matrix games to a certified
//!   exploitability, plus pure max-min solving for turn-based play;
//! * [`eval`] is the ground truth: backward-induction equilibria, best
//!   responses, duality gaps, occupancy measures, coverage diagnostics;
//! * [`data`] samples datasets, splits them, and builds empirical models;
//! * [`hoeffding`] and [`bernstein`] are the two offline learners, which
//!   produce one-sided value envelopes and the strategies they certify.
//!
//! With the default `parallel` feature, per-state equilibrium solves,
//! episode sampling, and model building run on the rayon thread pool;
//! without it everything runs sequentially with identical results.

pub mod bernstein;
pub mod data;
pub mod error;
pub mod eval;
mod exec;
pub mod game;
pub mod hoeffding;
pub mod learner;
pub mod matrix;
pub mod rng;
pub mod tables;

pub use bernstein::{run_bernstein, BernsteinBonuses, BernsteinOutput, ReferenceValues};
pub use data::{
    empirical_model, sample_dataset, split_stagewise, split_three_way, EmpiricalModel,
    ExplorationPolicy, OfflineDataset, Step, ThreeWaySplit,
};
pub use error::{Error, Result};
pub use eval::{
    coverage_report, duality_gap, max_best_response, max_unilateral_occupancy, min_best_response,
    nash_vi, occupancy, pair_value, BestResponse, CoverageReport, CoverageWitness, FixedSide,
    MinBestResponse, Occupancy,
};
pub use game::{
    compile_turn_based, make_hardness_pair, random_game, validate_game, Game, GameDims,
    MinStrategy, Player, Strategy, StrategyPair, TurnBasedMinStrategy, ValidationReport,
};
pub use hoeffding::{hoeffding_bonus, run_hoeffding, HoeffdingOutput};
pub use learner::{Diagnostics, LearnerOutput};
pub use matrix::{
    exploitability, solve_matrix_game, solve_maxmin_pure, Matrix, MatrixGameSolution, PureMaxmin,
};
pub use tables::{QTable, ValueTables};
