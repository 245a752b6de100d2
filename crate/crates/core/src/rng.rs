//! Seed splitting.
//!
//! Every random decision in the crate draws from a ChaCha8 stream keyed by
//! the user seed plus a path of counters (replicate, group index, restart,
//! ...). Streams are independent of evaluation order, so work can be
//! scheduled on any number of threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `stream` under `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Seed obtained by folding a whole path of stream counters.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &p| derive_seed(s, p))
}

/// RNG for the stream addressed by `path` under `seed`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_path(seed, path))
}

// Stream tags used across modules. Kept in one place so that no two call
// sites accidentally share a stream.
pub(crate) mod tag {
    pub const NODE_LABELS: u64 = 1;
    pub const EDGES: u64 = 2;
    pub const BLOCK_MATRIX: u64 = 3;
    pub const EIGEN: u64 = 10;
    pub const KMEANS: u64 = 11;
    pub const VEM: u64 = 12;
    pub const SELECTION: u64 = 13;
    pub const GROUP: u64 = 20;
    pub const MASK: u64 = 30;
}
