//! Seeded randomness.
//!
//! Every random decision in the crate draws from [`ChaCha8Rng`] seeded with
//! `seed_from_u64`, which is portable across platforms. Pipeline stages get
//! their own stream through [`derive_seed`] so that, for example, the pruning
//! draw does not depend on how many numbers the generator consumed.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stage tags mixed into the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Generate = 1,
    Prune = 2,
    Segment = 3,
    Instances = 4,
}

/// SplitMix64 finalizer applied to `seed` offset by the stage tag.
pub fn derive_seed(seed: u64, stage: Stage) -> u64 {
    let mut z = seed.wrapping_add((stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
