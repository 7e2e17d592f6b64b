//! Deterministic seed derivation. Every stochastic routine takes a base seed
//! and derives independent child seeds from `(base, indices...)`, so results do
//! not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for the path `indices` below `base`.
pub fn derive(base: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(base), |acc, &i| splitmix64(acc ^ splitmix64(i)))
}

/// Stream labels keep the ensemble, signal and probe draws of one trial apart.
pub mod stream {
    pub const ENSEMBLE: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const PROBE: u64 = 3;
    pub const PHANTOM: u64 = 4;
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
