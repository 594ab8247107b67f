//! Deterministic seed derivation.
//!
//! Every random stream in the crate is keyed by a root seed plus a short tag
//! path (repetition index, step index, sample index, ...). Derivation is a
//! splitmix64 chain, so any stream can be reconstructed independently of how
//! many other streams were consumed. This is what makes results identical
//! across worker counts and lets paired runs share an environment stream.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive a child seed from `root` and a tag path.
pub fn derive(root: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(root ^ 0xA076_1D64_78BD_642F);
    for &t in tags {
        s = splitmix64(s ^ t);
    }
    s
}

/// RNG seeded from a derived seed.
pub fn rng(root: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(root, tags))
}

/// Uniform draw in [0,1) keyed by (seed, index), with no stream state.
///
/// Used for lazily materialized edge worlds: the value depends only on the
/// key, so query order cannot change the world being observed.
pub fn keyed_unit(seed: u64, index: u64) -> f64 {
    let h = derive(seed, &[index]);
    // 53 high bits, the full precision of an f64 in [0,1).
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
