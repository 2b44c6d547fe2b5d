//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from a 64-bit value; child streams are derived with SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` under `master`:
/// `splitmix64(master ^ splitmix64(index))`.
pub fn run_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Independent sub-stream of `seed` identified by a small tag.
pub fn stream_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed.wrapping_add(tag.wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
