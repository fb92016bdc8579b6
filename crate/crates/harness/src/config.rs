//! Experiment configuration: game/policy sources and sweep parameters.
//!
//! Sources are compact strings so the same syntax works in config files
//! and on the command line:
//!
//! * games: `hardness1`, `hardness2`,
//!   `random:seed=1,S=4,A=2,B=2,H=3[,turn_based]`, or a JSON file path;
//! * policies: `uniform`, `hardness`, or a JSON file path.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use offline_zsg::{make_hardness_pair, random_game, validate_game, ExplorationPolicy, Game};

/// Matrix solver tolerance for exact evaluation paths.
pub const EXACT_EPS_NE: f64 = 1e-8;
/// Matrix solver tolerance inside the learners.
pub const LEARNER_EPS_NE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum GameSource {
    File(PathBuf),
    Generator {
        seed: u64,
        num_states: usize,
        num_actions_max: usize,
        num_actions_min: usize,
        horizon: usize,
        turn_based: bool,
    },
    Hardness1,
    Hardness2,
}

impl FromStr for GameSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hardness1" => return Ok(GameSource::Hardness1),
            "hardness2" => return Ok(GameSource::Hardness2),
            _ => {}
        }
        if let Some(spec) = s.strip_prefix("random:") {
            let mut seed = None;
            let mut states = None;
            let mut a = None;
            let mut b = None;
            let mut horizon = None;
            let mut turn_based = false;
            for field in spec.split(',') {
                if field == "turn_based" {
                    turn_based = true;
                    continue;
                }
                let (key, value) = field
                    .split_once('=')
                    .with_context(|| format!("bad generator field `{field}`"))?;
                let parse = || {
                    value
                        .parse::<u64>()
                        .with_context(|| format!("bad generator value `{value}` for `{key}`"))
                };
                match key {
                    "seed" => seed = Some(parse()?),
                    "S" => states = Some(parse()? as usize),
                    "A" => a = Some(parse()? as usize),
                    "B" => b = Some(parse()? as usize),
                    "H" => horizon = Some(parse()? as usize),
                    other => bail!("unknown generator field `{other}`"),
                }
            }
            return Ok(GameSource::Generator {
                seed: seed.context("generator spec needs seed=")?,
                num_states: states.context("generator spec needs S=")?,
                num_actions_max: a.context("generator spec needs A=")?,
                num_actions_min: b.context("generator spec needs B=")?,
                horizon: horizon.context("generator spec needs H=")?,
                turn_based,
            });
        }
        Ok(GameSource::File(PathBuf::from(s)))
    }
}

/// Resolves a game source string, validating the instance.
pub fn resolve_game(source: &str) -> Result<(Game, String)> {
    let parsed: GameSource = source.parse()?;
    let game = match &parsed {
        GameSource::Hardness1 => make_hardness_pair().0,
        GameSource::Hardness2 => make_hardness_pair().1,
        GameSource::Generator {
            seed,
            num_states,
            num_actions_max,
            num_actions_min,
            horizon,
            turn_based,
        } => random_game(*seed, *num_states, *num_actions_max, *num_actions_min, *horizon)?
            .with_turn_based(*turn_based),
        GameSource::File(path) => Game::load(path)?,
    };
    let report = validate_game(&game);
    if !report.is_valid() {
        bail!("game `{source}` is invalid:\n{report}");
    }
    Ok((game, source.to_string()))
}

/// Resolves an exploration-policy source string against a game.
pub fn resolve_rho(source: &str, game: &Game) -> Result<(ExplorationPolicy, String)> {
    let d = game.dims();
    let rho = match source {
        "uniform" => ExplorationPolicy::uniform(d),
        "hardness" => {
            let rho = make_hardness_pair().2;
            if (d.num_states, d.num_actions_max, d.num_actions_min, d.horizon) != (1, 2, 2, 1) {
                bail!("the hardness exploration policy needs a 1-state, 2x2-action, 1-step game");
            }
            rho
        }
        path => ExplorationPolicy::load(Path::new(path))?,
    };
    let report = rho.validate();
    if !report.is_valid() {
        bail!("exploration policy `{source}` is invalid:\n{report}");
    }
    Ok((rho, source.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Hoeffding,
    Bernstein,
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(&self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::Hoeffding => vec![Algorithm::Hoeffding],
            AlgorithmChoice::Bernstein => vec![Algorithm::Bernstein],
            AlgorithmChoice::Both => vec![Algorithm::Hoeffding, Algorithm::Bernstein],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hoeffding,
    Bernstein,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::Hoeffding => write!(f, "hoeffding"),
            Algorithm::Bernstein => write!(f, "bernstein"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hoeffding" => Ok(Algorithm::Hoeffding),
            "bernstein" => Ok(Algorithm::Bernstein),
            other => bail!("unknown algorithm `{other}`"),
        }
    }
}

fn default_delta() -> f64 {
    0.05
}

fn default_c() -> f64 {
    1.0
}

fn default_eps_ne() -> f64 {
    LEARNER_EPS_NE
}

fn default_timeout() -> f64 {
    300.0
}

/// One sweep: a game, an exploration policy, algorithms, a grid of
/// dataset sizes, and seeds. Loaded from JSON; command-line flags
/// override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub game: String,
    pub rho: String,
    pub algorithm: AlgorithmChoice,
    pub n_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_eps_ne")]
    pub eps_ne: f64,
    pub out: PathBuf,
    /// 0 means one worker per CPU.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_timeout")]
    pub timeout_seconds: f64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            bail!("n_grid must not be empty");
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            bail!("n_grid must be strictly increasing, got {:?}", self.n_grid);
        }
        if self.n_grid.contains(&0) {
            bail!("n_grid entries must be positive");
        }
        if self.seeds.is_empty() {
            bail!("seeds must not be empty");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("delta must lie in (0, 1), got {}", self.delta);
        }
        if self.c <= 0.0 {
            bail!("c must be positive, got {}", self.c);
        }
        if self.eps_ne <= 0.0 {
            bail!("eps_ne must be positive, got {}", self.eps_ne);
        }
        Ok(())
    }
}

/// Runs `f` inside a worker pool of the requested size (0 = default).
/// Without the `parallel` feature the work runs on the calling thread.
pub fn with_worker_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .context("cannot build worker pool")?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(f())
    }
}
