//! Command-line front end: exact solving, dataset generation, offline
//! learning, gap evaluation, coverage diagnosis, sweeps, the
//! indistinguishability reproduction, and rate fitting.
//!
//! Exit codes: 0 success, 1 any failed row or violated bound, 2 config
//! error (bad flags, unreadable or invalid inputs).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use offline_zsg::{
    coverage_report, duality_gap, nash_vi, run_bernstein, run_hoeffding, sample_dataset,
    OfflineDataset, StrategyPair, ValueTables,
};
use offline_zsg_harness::{
    fit_loglog_slope, median, read_sweep_csv, reproduce_hardness, resolve_game, resolve_rho,
    run_sweep, with_worker_pool, Algorithm, AlgorithmChoice, ExperimentConfig, SweepRow,
    EXACT_EPS_NE, LEARNER_EPS_NE,
};

#[derive(Parser)]
#[command(
    name = "offline-zsg",
    about = "Offline zero-sum Markov game toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a game exactly by backward induction and print its value.
    SolveExact {
        /// Game source: hardness1 | hardness2 | random:seed=..,S=..,A=..,B=..,H=..[,turn_based] | file path.
        #[arg(long)]
        game: String,
        #[arg(long, default_value_t = EXACT_EPS_NE)]
        eps_ne: f64,
        /// Write the equilibrium pair and value tables as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample an offline dataset and write it as CSV.
    Sample {
        #[arg(long)]
        game: String,
        /// Policy source: uniform | hardness | file path.
        #[arg(long)]
        rho: String,
        #[arg(long)]
        n: usize,
        #[arg(long, env = "OFFLINE_ZSG_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an offline learner on a dataset (from --data, or sampled on
    /// the fly from --rho and --n).
    Learn {
        #[arg(long, value_enum)]
        alg: Algorithm,
        #[arg(long)]
        game: String,
        /// Dataset CSV produced by `sample`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, env = "OFFLINE_ZSG_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = LEARNER_EPS_NE)]
        eps_ne: f64,
        /// Write the full learner output as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the exact duality gap of a stored strategy pair.
    EvalGap {
        #[arg(long)]
        game: String,
        /// JSON file with fields "mu" and "nu" (as written by
        /// solve-exact or learn).
        #[arg(long)]
        strategies: PathBuf,
    },
    /// Diagnose dataset coverage of a game/policy pair.
    Coverage {
        #[arg(long)]
        game: String,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded sweep over (algorithm, n, seed) and write a CSV.
    Sweep {
        /// JSON config; command-line flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        game: Option<String>,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long, value_enum)]
        alg: Option<AlgorithmChoice>,
        /// Dataset sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Seeds, comma separated.
        #[arg(long, value_delimiter = ',')]
        seed: Option<Vec<u64>>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        eps_ne: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per CPU).
        #[arg(long)]
        workers: Option<usize>,
        /// Per-run wall-clock budget in seconds.
        #[arg(long)]
        timeout_seconds: Option<f64>,
    },
    /// Reproduce the two-game indistinguishability bound.
    Hardness {
        #[arg(long)]
        n: usize,
        #[arg(long, env = "OFFLINE_ZSG_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = LEARNER_EPS_NE)]
        eps_ne: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit log-log rate slopes to a sweep CSV (median gap per n).
    FitRate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        alg: Option<Algorithm>,
    },
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

trait PhaseExt<T> {
    fn config(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T> PhaseExt<T> for Result<T> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(Failure::Config)
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(Failure::Runtime)
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[derive(Serialize)]
struct SolveExactOutput {
    #[serde(flatten)]
    pair: StrategyPair,
    values: ValueTables,
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::SolveExact { game, eps_ne, out } => {
            let (game, label) = resolve_game(&game).config()?;
            let (pair, values) = nash_vi(&game, eps_ne)
                .map_err(|e| anyhow!(e))
                .runtime()?;
            let s1 = game.dims().initial_state;
            println!("game: {label}");
            println!("value at initial state: {}", values.at_start(s1));
            if let Some(path) = out {
                let payload = SolveExactOutput { pair, values };
                std::fs::write(
                    &path,
                    serde_json::to_string(&payload).expect("serializable"),
                )
                .with_context(|| format!("cannot write {}", path.display()))
                .runtime()?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample {
            game,
            rho,
            n,
            seed,
            out,
        } => {
            let (game, _) = resolve_game(&game).config()?;
            let (rho, _) = resolve_rho(&rho, &game).config()?;
            let ds = sample_dataset(&game, &rho, n, seed)
                .map_err(|e| anyhow!(e))
                .runtime()?;
            ds.save_csv(&out).map_err(|e| anyhow!(e)).runtime()?;
            println!(
                "wrote {} ({} episodes x {} steps)",
                out.display(),
                ds.num_episodes(),
                ds.dims().horizon
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Learn {
            alg,
            game,
            data,
            rho,
            n,
            seed,
            delta,
            c,
            eps_ne,
            out,
        } => {
            let (game, _) = resolve_game(&game).config()?;
            let ds: OfflineDataset = match (data, rho, n) {
                (Some(path), _, _) => OfflineDataset::load_csv(&path, game.dims())
                    .map_err(|e| anyhow!(e))
                    .config()?,
                (None, Some(rho), Some(n)) => {
                    let (rho, _) = resolve_rho(&rho, &game).config()?;
                    sample_dataset(&game, &rho, n, seed)
                        .map_err(|e| anyhow!(e))
                        .runtime()?
                }
                _ => {
                    return Err(Failure::Config(anyhow!(
                        "learn needs either --data, or --rho and --n"
                    )))
                }
            };
            let s1 = game.dims().initial_state;
            let turn_based = game.turn_based();
            let (pair, v_low, v_up, json) = match alg {
                Algorithm::Hoeffding => {
                    let o = run_hoeffding(&ds, turn_based, delta, eps_ne, seed)
                        .map_err(|e| anyhow!(e))
                        .runtime()?;
                    (
                        o.learner.strategy_pair(),
                        o.learner.v_low.at_start(s1),
                        o.learner.v_up.at_start(s1),
                        serde_json::to_string(&o).expect("serializable"),
                    )
                }
                Algorithm::Bernstein => {
                    let o = run_bernstein(&ds, turn_based, delta, c, eps_ne, seed)
                        .map_err(|e| anyhow!(e))
                        .runtime()?;
                    (
                        o.learner.strategy_pair(),
                        o.learner.v_low.at_start(s1),
                        o.learner.v_up.at_start(s1),
                        serde_json::to_string(&o).expect("serializable"),
                    )
                }
            };
            let gap = duality_gap(&game, &pair)
                .map_err(|e| anyhow!(e))
                .runtime()?;
            println!("algorithm: {alg}");
            println!("episodes: {}", ds.num_episodes());
            println!("v_low_1: {v_low}");
            println!("v_up_1: {v_up}");
            println!("exact duality gap: {gap}");
            if let Some(path) = out {
                std::fs::write(&path, json)
                    .with_context(|| format!("cannot write {}", path.display()))
                    .runtime()?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalGap { game, strategies } => {
            let (game, _) = resolve_game(&game).config()?;
            let pair = StrategyPair::load(&strategies)
                .map_err(|e| anyhow!(e))
                .config()?;
            let gap = duality_gap(&game, &pair)
                .map_err(|e| anyhow!(e))
                .runtime()?;
            println!("duality gap: {gap}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Coverage { game, rho, out } => {
            let (game, _) = resolve_game(&game).config()?;
            let (rho, _) = resolve_rho(&rho, &game).config()?;
            let (pair, _) = nash_vi(&game, EXACT_EPS_NE)
                .map_err(|e| anyhow!(e))
                .runtime()?;
            let report = coverage_report(&game, &rho, &pair)
                .map_err(|e| anyhow!(e))
                .runtime()?;
            println!("assumption1 (single strategy coverage): {}", report.assumption1_holds);
            println!("assumption2 (unilateral coverage):      {}", report.assumption2_holds);
            println!("assumption3 (uniform coverage):         {}", report.assumption3_holds);
            println!("c_star: {}", report.c_star);
            println!("d_m: {}", report.d_m);
            if let Some(w) = &report.witness {
                println!(
                    "witness: {} player deviation reaches uncovered cell (h={}, s={}, a={}, b={})",
                    w.deviator, w.timestep, w.state, w.action_max, w.action_min
                );
            }
            if let Some(path) = out {
                report.save(&path).map_err(|e| anyhow!(e)).runtime()?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            game,
            rho,
            alg,
            n,
            seed,
            delta,
            c,
            eps_ne,
            out,
            workers,
            timeout_seconds,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path).config()?,
                None => ExperimentConfig {
                    game: String::new(),
                    rho: String::new(),
                    algorithm: AlgorithmChoice::Both,
                    n_grid: Vec::new(),
                    seeds: Vec::new(),
                    delta: 0.05,
                    c: 1.0,
                    eps_ne: LEARNER_EPS_NE,
                    out: PathBuf::new(),
                    workers: 0,
                    timeout_seconds: 300.0,
                },
            };
            if let Some(v) = game {
                cfg.game = v;
            }
            if let Some(v) = rho {
                cfg.rho = v;
            }
            if let Some(v) = alg {
                cfg.algorithm = v;
            }
            if let Some(v) = n {
                cfg.n_grid = v;
            }
            if let Some(v) = seed {
                cfg.seeds = v;
            }
            if let Some(v) = delta {
                cfg.delta = v;
            }
            if let Some(v) = c {
                cfg.c = v;
            }
            if let Some(v) = eps_ne {
                cfg.eps_ne = v;
            }
            if let Some(v) = out {
                cfg.out = v;
            }
            if let Some(v) = workers {
                cfg.workers = v;
            }
            if let Some(v) = timeout_seconds {
                cfg.timeout_seconds = v;
            }
            if cfg.game.is_empty() || cfg.rho.is_empty() || cfg.out.as_os_str().is_empty() {
                return Err(Failure::Config(anyhow!(
                    "sweep needs --game, --rho and --out (or a config file providing them)"
                )));
            }
            cfg.validate().config()?;
            let (game, _) = resolve_game(&cfg.game).config()?;
            let (rho, _) = resolve_rho(&cfg.rho, &game).config()?;
            let result = with_worker_pool(cfg.workers, || run_sweep(&cfg, &game, &rho))
                .and_then(|inner| inner)
                .runtime()?;
            let failed = result.failed_rows();
            println!(
                "wrote {} ({} rows, {} reused, {} failed)",
                cfg.out.display(),
                result.rows.len(),
                result.reused,
                failed
            );
            if failed > 0 {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Hardness {
            n,
            seed,
            delta,
            c,
            eps_ne,
            out,
        } => {
            let report = reproduce_hardness(n, seed, delta, c, eps_ne).runtime()?;
            println!("models identical under both games: {}", report.models_identical);
            for row in &report.rows {
                println!(
                    "{}: gap_game1={} gap_game2={} sum={} max={}",
                    row.algorithm, row.gap_game1, row.gap_game2, row.sum, row.max
                );
            }
            if let Some(path) = out {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&report).expect("serializable"),
                )
                .with_context(|| format!("cannot write {}", path.display()))
                .runtime()?;
                println!("wrote {}", path.display());
            }
            if report.passes() {
                println!("bounds met: sum >= 0.5 - 1e-6 and max >= 0.25 - 1e-6");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("bounds violated");
                Ok(ExitCode::from(1))
            }
        }
        Command::FitRate { data, alg } => {
            let rows = read_sweep_csv(&data).config()?;
            let mut by_algorithm: BTreeMap<Algorithm, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
            for row in rows.iter().filter(|r| r.is_ok()) {
                if let Some(filter) = alg {
                    if row.algorithm != filter {
                        continue;
                    }
                }
                if let SweepRow { gap: Some(gap), .. } = row {
                    by_algorithm
                        .entry(row.algorithm)
                        .or_default()
                        .entry(row.n)
                        .or_default()
                        .push(*gap);
                }
            }
            if by_algorithm.is_empty() {
                return Err(Failure::Runtime(anyhow!("no usable rows in {}", data.display())));
            }
            for (algorithm, by_n) in by_algorithm {
                let points: Vec<(f64, f64)> = by_n
                    .iter()
                    .map(|(&n, gaps)| (n as f64, median(gaps)))
                    .collect();
                let fit = fit_loglog_slope(&points).runtime()?;
                println!(
                    "{algorithm}: slope={:.4} intercept={:.4} r2={:.4} dropped={}",
                    fit.slope, fit.intercept, fit.r_squared, fit.dropped
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
