//! Seeded randomness for splits and simulations.
//!
//! Everything random in the crate is drawn from ChaCha8 (`rand_chacha`),
//! keyed by a 64-bit seed through `SeedableRng::seed_from_u64` and, for
//! per-trial streams, `set_stream(trial_index)`. Shuffles are Fisher–Yates
//! from the last index down, drawing `j = next_u64() % (i + 1)`, so a split
//! can be replayed from the seed alone by any implementation of the same
//! generator.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn fisher_yates<T>(items: &mut [T], rng: &mut impl RngCore) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuffle_is_a_permutation_and_replays() {
        let mut a: Vec<u32> = (0..20).collect();
        let mut b = a.clone();
        fisher_yates(&mut a, &mut stream(7, 3));
        fisher_yates(&mut b, &mut stream(7, 3));
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
        let mut c: Vec<u32> = (0..20).collect();
        fisher_yates(&mut c, &mut stream(7, 4));
        assert_ne!(a, c);
    }
}
