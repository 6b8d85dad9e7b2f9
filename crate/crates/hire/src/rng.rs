//! Deterministic seeded random streams.
//!
//! A run owns one master seed. Every consumer (parameter init, dropout,
//! graph generation, k-means restarts, ...) draws from its own named
//! substream so that enabling one consumer never perturbs another. The
//! substream seed is a splitmix64-style mix of the master seed and an
//! FNV-1a hash of the label, and the generator itself is ChaCha8, which
//! has a portable, documented stream for a given seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic substream for `label` derived from `seed`.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ fnv1a(label.as_bytes())))
}

/// Indexed substream, for families of consumers such as sweep cells or
/// k-means restarts.
pub fn substream_indexed(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ fnv1a(label.as_bytes()) ^ splitmix64(index),
    ))
}
