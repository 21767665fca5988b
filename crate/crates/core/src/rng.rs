//! Deterministic random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! root seed and a path of integers (cell, replication, bootstrap replicate,
//! retry). Streams for distinct paths are unrelated, so results never depend
//! on the order in which work items execute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used everywhere in the crate.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a path of keys into a root seed.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(root), |acc, &k| {
        splitmix64(acc ^ splitmix64(k.wrapping_add(GOLDEN)))
    })
}

/// Generator for the substream `(root, path...)`.
pub fn substream(root: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, path))
}

/// 64-bit FNV-1a; stable across platforms and releases.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
