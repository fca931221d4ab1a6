//! Seeded random streams and the seed-split used for batches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Default seed used by the CLI when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 0x5eed_2017;

/// 64-bit mixing permutation (the SplitMix64 finalizer).
///
/// Bijective on `u64`, so distinct inputs never collide.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `index` in a batch started from `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index)
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}
