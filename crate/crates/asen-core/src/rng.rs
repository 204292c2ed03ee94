//! Seed derivation and deterministic random streams.
//!
//! Every randomized operation in this crate takes an explicit `u64` seed and
//! owns a [`ChaCha8Rng`] derived from it. Independent consumers (pool
//! learners, bootstrap resamples, permutation repeats) get decorrelated
//! sub-seeds via [`derive_seed`], so serial and concurrent execution produce
//! identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of an independent sub-stream from a master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(master ^ mix(stream))
}

/// Deterministic RNG for the given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derive_seed_is_deterministic_and_spreads() {
        assert_eq!(derive_seed(42, 1), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 1), derive_seed(42, 2));
        assert_ne!(derive_seed(42, 1), derive_seed(43, 1));
        // adjacent streams should not produce adjacent seeds
        let a = derive_seed(0, 0);
        let b = derive_seed(0, 1);
        assert!(a.wrapping_sub(b) > 1000 && b.wrapping_sub(a) > 1000);
    }

    #[test]
    fn rng_streams_are_reproducible() {
        let mut r1 = rng_from_seed(7);
        let mut r2 = rng_from_seed(7);
        for _ in 0..16 {
            assert_eq!(r1.gen::<u64>(), r2.gen::<u64>());
        }
    }
}
