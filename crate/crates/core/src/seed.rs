//! Counter-based seed derivation.
//!
//! A child seed is a pure function of a parent seed and a path of integer
//! coordinates (scenario, replicate, field tag, ...). No generator state is
//! shared, so any schedule of parallel work sees the same seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and a coordinate path.
pub fn derive(parent: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(parent.wrapping_add(GOLDEN)), |acc, &c| {
        mix64(acc ^ mix64(c.wrapping_add(GOLDEN).wrapping_mul(GOLDEN)))
    })
}

/// Generator for a seed produced by [`derive`].
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
