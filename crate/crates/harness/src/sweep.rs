//! Seeded experiment sweeps over (algorithm, n, seed) with CSV output.
//!
//! Sweeps are resumable: rows already present in the output file (same
//! key, status ok) are reused, only missing rows are computed, and the
//! final file is sorted by key either way. Everything except the
//! `runtime_seconds` column is deterministic for a fixed config.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

use offline_zsg::{
    coverage_report, duality_gap, nash_vi, run_bernstein, run_hoeffding, sample_dataset,
    ExplorationPolicy, Game,
};

use crate::config::{Algorithm, ExperimentConfig, EXACT_EPS_NE};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub seed: u64,
    pub gap: Option<f64>,
    pub v_low_1: Option<f64>,
    pub v_up_1: Option<f64>,
    pub c_star: f64,
    pub d_m: f64,
    pub runtime_seconds: f64,
    pub status: String,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn key(&self) -> (Algorithm, usize, u64) {
        (self.algorithm, self.n, self.seed)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// How many rows were reused from an existing output file.
    pub reused: usize,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

pub const SWEEP_HEADER: &str =
    "algorithm,n,seed,gap,v_low_1,v_up_1,c_star,d_m,runtime_seconds,status";

/// Runs the sweep, reusing any ok rows already present at `cfg.out`, and
/// rewrites the CSV sorted by (algorithm, n, seed). The caller is
/// responsible for wrapping this in a worker pool if a bounded worker
/// count is wanted.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    game: &Game,
    rho: &ExplorationPolicy,
) -> Result<SweepResult> {
    cfg.validate()?;
    let (pair, _) = nash_vi(game, EXACT_EPS_NE)?;
    let coverage = coverage_report(game, rho, &pair)?;

    let existing: HashMap<(Algorithm, usize, u64), SweepRow> = if cfg.out.exists() {
        read_sweep_csv(&cfg.out)?
            .into_iter()
            .filter(|r| r.is_ok())
            .map(|r| (r.key(), r))
            .collect()
    } else {
        HashMap::new()
    };

    let mut tasks = Vec::new();
    for algorithm in cfg.algorithm.algorithms() {
        for &n in &cfg.n_grid {
            for &seed in &cfg.seeds {
                tasks.push((algorithm, n, seed));
            }
        }
    }

    let run_one = |&(algorithm, n, seed): &(Algorithm, usize, u64)| -> SweepRow {
        if let Some(row) = existing.get(&(algorithm, n, seed)) {
            return row.clone();
        }
        let started = Instant::now();
        let outcome = run_single(cfg, game, rho, algorithm, n, seed);
        let runtime_seconds = started.elapsed().as_secs_f64();
        let mut row = SweepRow {
            algorithm,
            n,
            seed,
            gap: None,
            v_low_1: None,
            v_up_1: None,
            c_star: coverage.c_star,
            d_m: coverage.d_m,
            runtime_seconds,
            status: "ok".into(),
        };
        match outcome {
            Ok((gap, v_low, v_up)) => {
                if runtime_seconds > cfg.timeout_seconds {
                    row.status = format!("failed: exceeded {} s budget", cfg.timeout_seconds);
                } else {
                    row.gap = Some(gap);
                    row.v_low_1 = Some(v_low);
                    row.v_up_1 = Some(v_up);
                }
            }
            Err(e) => {
                row.status = format!("failed: {}", sanitize(&e.to_string()));
            }
        }
        row
    };

    #[cfg(feature = "parallel")]
    let mut rows: Vec<SweepRow> = {
        use rayon::prelude::*;
        tasks.par_iter().map(run_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<SweepRow> = tasks.iter().map(run_one).collect();

    rows.sort_by_key(|r| r.key());
    let reused = rows
        .iter()
        .filter(|r| existing.contains_key(&r.key()))
        .count();
    write_sweep_csv(&cfg.out, &rows)?;
    Ok(SweepResult { rows, reused })
}

fn run_single(
    cfg: &ExperimentConfig,
    game: &Game,
    rho: &ExplorationPolicy,
    algorithm: Algorithm,
    n: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let ds = sample_dataset(game, rho, n, seed)?;
    let turn_based = game.turn_based();
    let (pair, v_low, v_up) = match algorithm {
        Algorithm::Hoeffding => {
            let out = run_hoeffding(&ds, turn_based, cfg.delta, cfg.eps_ne, seed)?;
            let s1 = game.dims().initial_state;
            (
                out.learner.strategy_pair(),
                out.learner.v_low.at_start(s1),
                out.learner.v_up.at_start(s1),
            )
        }
        Algorithm::Bernstein => {
            let out = run_bernstein(&ds, turn_based, cfg.delta, cfg.c, cfg.eps_ne, seed)?;
            let s1 = game.dims().initial_state;
            (
                out.learner.strategy_pair(),
                out.learner.v_low.at_start(s1),
                out.learner.v_up.at_start(s1),
            )
        }
    };
    let gap = duality_gap(game, &pair)?;
    Ok((gap, v_low, v_up))
}

fn sanitize(message: &str) -> String {
    message.replace([',', '\n'], ";")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.n,
            r.seed,
            fmt_opt(r.gap),
            fmt_opt(r.v_low_1),
            fmt_opt(r.v_up_1),
            r.c_star,
            r.d_m,
            r.runtime_seconds,
            r.status
        ));
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: bad record {}", path.display(), i + 2))?;
        let field = |k: usize| record.get(k).unwrap_or("").trim().to_string();
        let opt = |k: usize| -> Result<Option<f64>> {
            let f = field(k);
            if f.is_empty() {
                Ok(None)
            } else {
                Ok(Some(f.parse().with_context(|| {
                    format!("{}: row {}: bad float `{f}`", path.display(), i + 2)
                })?))
            }
        };
        rows.push(SweepRow {
            algorithm: field(0).parse()?,
            n: field(1)
                .parse()
                .with_context(|| format!("{}: row {}: bad n", path.display(), i + 2))?,
            seed: field(2)
                .parse()
                .with_context(|| format!("{}: row {}: bad seed", path.display(), i + 2))?,
            gap: opt(3)?,
            v_low_1: opt(4)?,
            v_up_1: opt(5)?,
            c_star: field(6).parse().unwrap_or(f64::INFINITY),
            d_m: field(7)
                .parse()
                .with_context(|| format!("{}: row {}: bad d_m", path.display(), i + 2))?,
            runtime_seconds: field(8).parse().unwrap_or(0.0),
            status: field(9),
        });
    }
    Ok(rows)
}
