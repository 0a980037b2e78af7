//! Seeded random streams.
//!
//! Every stochastic step draws from a ChaCha8 generator (a counter-based
//! stream cipher). The 256-bit key is expanded from the 64-bit user seed with
//! SplitMix64 and the 64-bit stream id is derived from a purpose tag and a
//! work-unit index, so that fold `i` of a pipeline sees the same numbers no
//! matter which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier written into every output so runs can be reproduced.
pub const RNG_NAME: &str = "chacha8-splitmix64-v1";

/// Purpose tags that separate independent streams derived from one seed.
pub mod tag {
    pub const FOLDS: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const CLASSIFIER: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const COHORT: u64 = 5;
    pub const DATASET: u64 = 6;
    pub const KMEANS: u64 = 7;
    pub const TREE: u64 = 8;
    pub const INNER_FOLDS: u64 = 9;
    pub const LABELS: u64 = 10;
}

/// One step of the SplitMix64 sequence.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `(seed, tag, index)`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// A generator keyed by `seed` on the stream selected by `(tag, index)`.
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(derive_seed(0, tag, index));
    rng
}

/// Shorthand for the root stream of a seed.
pub fn root(seed: u64) -> ChaCha8Rng {
    stream(seed, 0, 0)
}
