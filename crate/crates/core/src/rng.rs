//! Seeding scheme.
//!
//! Every randomized operation in this crate is driven by ChaCha8, a
//! counter-based generator, so results are bit-reproducible across
//! platforms and thread counts:
//!
//! * dataset sampling uses one ChaCha8 stream per episode
//!   (`set_stream(episode_index)` on a generator seeded from the dataset
//!   seed), so episodes can be drawn in parallel in any order;
//! * split shuffles use a single generator seeded from the split seed;
//! * when an operation needs several independent sub-seeds, they are
//!   drawn from a seeded generator in a fixed documented order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for a whole operation (shuffles, game generation).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for one episode of a dataset draw: same base seed, one
/// stream per episode index.
pub fn episode_stream(seed: u64, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode as u64);
    rng
}

/// A fixed sequence of sub-seeds derived from one seed. Index `k` always
/// yields the same value for the same `seed`.
pub fn sub_seed(seed: u64, k: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut value = 0;
    for _ in 0..=k {
        value = rng.random::<u64>();
    }
    value
}

/// Samples an index from a finite distribution given by `weights`
/// (assumed nonnegative, summing to ~1). Falls back to the last index on
/// accumulated round-off.
pub fn sample_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seeds_are_stable_and_distinct() {
        assert_eq!(sub_seed(7, 0), sub_seed(7, 0));
        assert_ne!(sub_seed(7, 0), sub_seed(7, 1));
        assert_ne!(sub_seed(7, 0), sub_seed(8, 0));
    }

    #[test]
    fn episode_streams_differ() {
        let mut a = episode_stream(1, 0);
        let mut b = episode_stream(1, 1);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn sample_index_covers_support() {
        let mut rng = seeded(3);
        let w = [0.25, 0.5, 0.25];
        let mut seen = [false; 3];
        for _ in 0..200 {
            seen[sample_index(&mut rng, &w)] = true;
        }
        assert_eq!(seen, [true, true, true]);
    }
}
