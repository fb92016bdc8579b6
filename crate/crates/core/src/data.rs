//! Offline datasets: sampling from exploration policies, the two split
//! schemes used by the learners, and empirical models (visit counts,
//! empirical rewards and transition kernels).

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::game::{check_prob_row, Game, GameDims, ValidationReport, Violation};
use crate::rng;

/// Markovian behavior policy over joint actions: one distribution on
/// A x B per (h, s).
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationPolicy {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions_max: usize,
    pub num_actions_min: usize,
    /// Row-major over (h, s, a, b).
    probs: Vec<f64>,
}

impl ExplorationPolicy {
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions_max: usize,
        num_actions_min: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if probs.len() != horizon * num_states * num_actions_max * num_actions_min {
            return Err(Error::DimensionMismatch(format!(
                "exploration policy has {} entries, expected {}",
                probs.len(),
                horizon * num_states * num_actions_max * num_actions_min
            )));
        }
        Ok(ExplorationPolicy {
            horizon,
            num_states,
            num_actions_max,
            num_actions_min,
            probs,
        })
    }

    /// Uniform distribution over all joint actions at every (h, s).
    pub fn uniform(dims: &GameDims) -> Self {
        let joint = dims.num_actions_max * dims.num_actions_min;
        ExplorationPolicy {
            horizon: dims.horizon,
            num_states: dims.num_states,
            num_actions_max: dims.num_actions_max,
            num_actions_min: dims.num_actions_min,
            probs: vec![1.0 / joint as f64; dims.horizon * dims.num_states * joint],
        }
    }

    #[inline]
    pub fn joint_prob(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.probs[((h * self.num_states + s) * self.num_actions_max + a) * self.num_actions_min + b]
    }

    /// Joint distribution at (h, s), row-major in `a`.
    #[inline]
    pub fn joint_row(&self, h: usize, s: usize) -> &[f64] {
        let joint = self.num_actions_max * self.num_actions_min;
        let lo = (h * self.num_states + s) * joint;
        &self.probs[lo..lo + joint]
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for h in 0..self.horizon {
            for s in 0..self.num_states {
                if let Some(reason) = check_prob_row(self.joint_row(h, s)) {
                    violations.push(Violation::Distribution {
                        location: format!("rho[{h}][{s}]"),
                        reason,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    fn matches(&self, dims: &GameDims) -> Result<()> {
        if self.horizon != dims.horizon
            || self.num_states != dims.num_states
            || self.num_actions_max != dims.num_actions_max
            || self.num_actions_min != dims.num_actions_min
        {
            return Err(Error::DimensionMismatch(
                "exploration policy dimensions do not match the game".into(),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("policy serialization cannot fail");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct ExplorationPolicyFile {
    dist: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Serialize for ExplorationPolicy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dist = (0..self.horizon)
            .map(|h| {
                (0..self.num_states)
                    .map(|s| {
                        (0..self.num_actions_max)
                            .map(|a| {
                                (0..self.num_actions_min)
                                    .map(|b| self.joint_prob(h, s, a, b))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ExplorationPolicyFile { dist }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExplorationPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let file = ExplorationPolicyFile::deserialize(deserializer)?;
        let horizon = file.dist.len();
        let num_states = file.dist.first().map(|v| v.len()).unwrap_or(0);
        let num_actions_max = file
            .dist
            .first()
            .and_then(|v| v.first())
            .map(|v| v.len())
            .unwrap_or(0);
        let num_actions_min = file
            .dist
            .first()
            .and_then(|v| v.first())
            .and_then(|v| v.first())
            .map(|v| v.len())
            .unwrap_or(0);
        if horizon == 0 || num_states == 0 || num_actions_max == 0 || num_actions_min == 0 {
            return Err(D::Error::custom("empty exploration policy dist"));
        }
        let mut probs = Vec::with_capacity(horizon * num_states * num_actions_max * num_actions_min);
        for (h, states) in file.dist.iter().enumerate() {
            if states.len() != num_states {
                return Err(D::Error::custom(format!("ragged dist at h={h}")));
            }
            for (s, actions) in states.iter().enumerate() {
                if actions.len() != num_actions_max {
                    return Err(D::Error::custom(format!("ragged dist at h={h}, s={s}")));
                }
                for (a, row) in actions.iter().enumerate() {
                    if row.len() != num_actions_min {
                        return Err(D::Error::custom(format!(
                            "ragged dist at h={h}, s={s}, a={a}"
                        )));
                    }
                    probs.extend_from_slice(row);
                }
            }
        }
        ExplorationPolicy::new(horizon, num_states, num_actions_max, num_actions_min, probs)
            .map_err(D::Error::custom)
    }
}

/// One transition of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: u32,
    pub action_max: u32,
    pub action_min: u32,
    pub reward: f64,
    pub next_state: u32,
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub game: String,
    pub rho: String,
    pub seed: u64,
}

/// `n` episodes of length `H`, stored flat: episode `e` occupies steps
/// `e*H .. (e+1)*H`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineDataset {
    dims: GameDims,
    num_episodes: usize,
    steps: Vec<Step>,
    pub provenance: Provenance,
}

impl OfflineDataset {
    pub fn dims(&self) -> &GameDims {
        &self.dims
    }

    pub fn num_episodes(&self) -> usize {
        self.num_episodes
    }

    #[inline]
    pub fn episode(&self, e: usize) -> &[Step] {
        &self.steps[e * self.dims.horizon..(e + 1) * self.dims.horizon]
    }

    /// Writes the columnar text format: header `episode,h,s,a,b,r,s_next`,
    /// rows sorted by (episode, h), rewards printed with 17 significant
    /// digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "episode,h,s,a,b,r,s_next")?;
        for e in 0..self.num_episodes {
            for (h, step) in self.episode(e).iter().enumerate() {
                writeln!(
                    out,
                    "{e},{h},{},{},{},{:.16e},{}",
                    step.state, step.action_max, step.action_min, step.reward, step.next_state
                )?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: &Path, dims: &GameDims) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file), dims, &path.display().to_string())
    }

    pub fn read_csv<R: BufRead>(reader: R, dims: &GameDims, source: &str) -> Result<Self> {
        let bad = |line: usize, reason: String| Error::DatasetFormat {
            path: source.to_string(),
            line,
            reason,
        };
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| bad(1, "empty file".into()))?;
        let header = header.map_err(|e| bad(1, e.to_string()))?;
        if header.trim() != "episode,h,s,a,b,r,s_next" {
            return Err(bad(1, format!("unexpected header `{header}`")));
        }
        let mut steps: Vec<Step> = Vec::new();
        let mut expected_episode = 0usize;
        let mut expected_h = 0usize;
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| bad(line_no, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(bad(line_no, format!("expected 7 fields, got {}", fields.len())));
            }
            let parse_usize = |i: usize, name: &str| -> Result<usize> {
                fields[i]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| bad(line_no, format!("bad {name}: {e}")))
            };
            let episode = parse_usize(0, "episode")?;
            let h = parse_usize(1, "h")?;
            let s = parse_usize(2, "s")?;
            let a = parse_usize(3, "a")?;
            let b = parse_usize(4, "b")?;
            let r: f64 = fields[5]
                .trim()
                .parse()
                .map_err(|e| bad(line_no, format!("bad r: {e}")))?;
            let s_next = parse_usize(6, "s_next")?;
            if episode != expected_episode || h != expected_h {
                return Err(bad(
                    line_no,
                    format!(
                        "rows must be sorted by (episode, h); expected ({expected_episode},{expected_h}), got ({episode},{h})"
                    ),
                ));
            }
            if h >= dims.horizon {
                return Err(bad(line_no, format!("h={h} out of range for horizon {}", dims.horizon)));
            }
            if s >= dims.num_states || s_next >= dims.num_states {
                return Err(bad(line_no, format!("state out of range for {} states", dims.num_states)));
            }
            if a >= dims.num_actions_max || b >= dims.num_actions_min {
                return Err(bad(line_no, "action out of range".into()));
            }
            if h == 0 && s != dims.initial_state {
                return Err(bad(
                    line_no,
                    format!("episode must start at state {}, got {s}", dims.initial_state),
                ));
            }
            if h > 0 {
                let prev = steps.last().expect("h > 0 implies a previous row");
                if prev.next_state as usize != s {
                    return Err(bad(
                        line_no,
                        format!(
                            "episode does not chain: previous s_next {} but s {s}",
                            prev.next_state
                        ),
                    ));
                }
            }
            steps.push(Step {
                state: s as u32,
                action_max: a as u32,
                action_min: b as u32,
                reward: r,
                next_state: s_next as u32,
            });
            expected_h += 1;
            if expected_h == dims.horizon {
                expected_h = 0;
                expected_episode += 1;
            }
        }
        if expected_h != 0 {
            return Err(bad(
                steps.len() + 1,
                format!("truncated episode {expected_episode}"),
            ));
        }
        Ok(OfflineDataset {
            dims: *dims,
            num_episodes: expected_episode,
            steps,
            provenance: Provenance {
                game: format!("csv:{source}"),
                rho: format!("csv:{source}"),
                seed: 0,
            },
        })
    }
}

/// Draws `n` i.i.d. episodes by following `rho` in `game`. Deterministic
/// in `seed`; episodes use independent generator streams, so the result
/// does not depend on the thread count.
pub fn sample_dataset(
    game: &Game,
    rho: &ExplorationPolicy,
    n: usize,
    seed: u64,
) -> Result<OfflineDataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let dims = *game.dims();
    rho.matches(&dims)?;
    let b = dims.num_actions_min;
    let episodes: Vec<Vec<Step>> = exec::map_indexed(n, |e| {
        let mut rng = rng::episode_stream(seed, e);
        let mut state = dims.initial_state;
        let mut steps = Vec::with_capacity(dims.horizon);
        for h in 0..dims.horizon {
            let joint = rng::sample_index(&mut rng, rho.joint_row(h, state));
            let (a, bb) = (joint / b, joint % b);
            let next = rng::sample_index(&mut rng, game.transition_row(h, state, a, bb));
            steps.push(Step {
                state: state as u32,
                action_max: a as u32,
                action_min: bb as u32,
                reward: game.reward(h, state, a, bb),
                next_state: next as u32,
            });
            state = next;
        }
        steps
    });
    Ok(OfflineDataset {
        dims,
        num_episodes: n,
        steps: episodes.into_iter().flatten().collect(),
        provenance: Provenance {
            game: "in-memory".into(),
            rho: "in-memory".into(),
            seed,
        },
    })
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng::seeded(seed));
    indices
}

/// Splits episode indices into `H` disjoint parts of `floor(n/H)` each
/// (seeded shuffle, then contiguous blocks; surplus episodes discarded).
/// Part `h` feeds timestep-h statistics only.
pub fn split_stagewise(ds: &OfflineDataset, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = ds.num_episodes();
    let h = ds.dims().horizon;
    if n < h {
        return Err(Error::InsufficientData { required: h, got: n });
    }
    let part = n / h;
    let indices = shuffled_indices(n, seed);
    Ok((0..h).map(|k| indices[k * part..(k + 1) * part].to_vec()).collect())
}

/// The three-way split: a reference part and a main part of `floor(n/3)`
/// episodes each, plus `H` per-stage parts of `floor(n/(3H))` episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeWaySplit {
    pub reference: Vec<usize>,
    pub main: Vec<usize>,
    pub per_stage: Vec<Vec<usize>>,
}

pub fn split_three_way(ds: &OfflineDataset, seed: u64) -> Result<ThreeWaySplit> {
    let n = ds.num_episodes();
    let h = ds.dims().horizon;
    if n < 3 * h {
        return Err(Error::InsufficientData {
            required: 3 * h,
            got: n,
        });
    }
    let third = n / 3;
    let stage = n / (3 * h);
    let indices = shuffled_indices(n, seed);
    let reference = indices[..third].to_vec();
    let main = indices[third..2 * third].to_vec();
    let per_stage = (0..h)
        .map(|k| indices[2 * third + k * stage..2 * third + (k + 1) * stage].to_vec())
        .collect();
    Ok(ThreeWaySplit {
        reference,
        main,
        per_stage,
    })
}

/// Visit counts, empirical rewards, and empirical transition kernels
/// built from a set of episodes. Unvisited cells carry reward 0 and the
/// uniform kernel 1/S; visited cells carry the observed reward and
/// empirical transition frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    dims: GameDims,
    counts: Vec<u64>,
    rewards: Vec<f64>,
    transitions: Vec<f64>,
}

impl EmpiricalModel {
    pub fn dims(&self) -> &GameDims {
        &self.dims
    }

    #[inline]
    fn cell(&self, h: usize, s: usize, a: usize, b: usize) -> usize {
        ((h * self.dims.num_states + s) * self.dims.num_actions_max + a) * self.dims.num_actions_min
            + b
    }

    #[inline]
    pub fn count(&self, h: usize, s: usize, a: usize, b: usize) -> u64 {
        self.counts[self.cell(h, s, a, b)]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.rewards[self.cell(h, s, a, b)]
    }

    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        let lo = self.cell(h, s, a, b) * self.dims.num_states;
        &self.transitions[lo..lo + self.dims.num_states]
    }

    /// Total visits at timestep `h` (equals the number of contributing
    /// episodes, since every episode contributes one visit per timestep).
    pub fn stage_total(&self, h: usize) -> u64 {
        let cells = self.dims.cells();
        self.counts[h * cells..(h + 1) * cells].iter().sum()
    }
}

struct Partial {
    counts: Vec<u64>,
    transition_counts: Vec<u64>,
    rewards: Vec<f64>,
    seen: Vec<bool>,
}

/// Builds the empirical model from the given episode indices of `ds`.
pub fn empirical_model(ds: &OfflineDataset, episodes: &[usize]) -> EmpiricalModel {
    let dims = *ds.dims();
    let cells = dims.horizon * dims.cells();
    let empty = || Partial {
        counts: vec![0; cells],
        transition_counts: vec![0; cells * dims.num_states],
        rewards: vec![0.0; cells],
        seen: vec![false; cells],
    };
    let fold = |range: std::ops::Range<usize>| {
        let mut part = empty();
        for &e in &episodes[range] {
            for (h, step) in ds.episode(e).iter().enumerate() {
                let cell = ((h * dims.num_states + step.state as usize) * dims.num_actions_max
                    + step.action_max as usize)
                    * dims.num_actions_min
                    + step.action_min as usize;
                part.counts[cell] += 1;
                part.transition_counts[cell * dims.num_states + step.next_state as usize] += 1;
                if !part.seen[cell] {
                    part.seen[cell] = true;
                    part.rewards[cell] = step.reward;
                }
            }
        }
        part
    };
    let merged = exec::fold_chunked(
        episodes.len(),
        2048,
        fold,
        |mut acc: Partial, part: Partial| {
            for i in 0..cells {
                acc.counts[i] += part.counts[i];
                if !acc.seen[i] && part.seen[i] {
                    acc.seen[i] = true;
                    acc.rewards[i] = part.rewards[i];
                }
            }
            for (t, &p) in acc.transition_counts.iter_mut().zip(&part.transition_counts) {
                *t += p;
            }
            acc
        },
        empty(),
    );

    let uniform = 1.0 / dims.num_states as f64;
    let mut transitions = vec![0.0; cells * dims.num_states];
    for cell in 0..cells {
        let count = merged.counts[cell];
        let row = &mut transitions[cell * dims.num_states..(cell + 1) * dims.num_states];
        if count == 0 {
            row.fill(uniform);
        } else {
            for (s2, slot) in row.iter_mut().enumerate() {
                *slot = merged.transition_counts[cell * dims.num_states + s2] as f64 / count as f64;
            }
        }
    }
    EmpiricalModel {
        dims,
        counts: merged.counts,
        rewards: merged.rewards,
        transitions,
    }
}
