//! Deterministic per-realization seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. A bijection on `u64`.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for realization `index` of a run with base seed `base`.
///
/// This is the SplitMix64 output for state `base + (index + 1)·γ`. Because
/// `γ` is odd and the finalizer is a bijection, distinct indices below 2^64
/// always give distinct seeds for a fixed base.
pub fn seed_for(base: u64, index: u64) -> u64 {
    mix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// The RNG used everywhere a realization needs randomness.
pub fn realization_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_for(base, index))
}
