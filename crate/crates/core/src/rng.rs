//! Counter-based randomness.
//!
//! Every random draw is keyed by `(seed, stream, index)` so results do not
//! depend on evaluation order: row 17 gets the same generator whether rows
//! are processed sequentially, in parallel, or one at a time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers. Distinct streams never share generator state.
pub mod streams {
    pub const GENERATE: u64 = 1;
    pub const REPAIR: u64 = 2;
    pub const SMOTE: u64 = 3;
    pub const INIT: u64 = 4;
    pub const CONSENT: u64 = 5;
    pub const INSERT: u64 = 6;
    pub const HUMAN: u64 = 7;
    pub const POLICY: u64 = 8;
    pub const SPLIT: u64 = 9;
    pub const PROBES: u64 = 10;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes the three keys into one 64-bit seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

/// Generator for a single `(seed, stream, index)` slot.
pub fn keyed_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}
