//! Deterministic child random streams.
//!
//! Every randomized unit of work derives its own ChaCha stream from the
//! root seed, a stage label, and a unit index. Streams are independent, so
//! stages can run in any order — or in parallel — without changing a single
//! draw, and one seed reproduces an entire experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(seed: u64, label: &str, index: u64) -> u64 {
    let mut hash = fnv1a(0xcbf2_9ce4_8422_2325, &seed.to_le_bytes());
    hash = fnv1a(hash, label.as_bytes());
    fnv1a(hash, &index.to_le_bytes())
}

/// Child stream for `(seed, label, index)`.
pub fn child_rng(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = mix(seed, label, index);
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Derived 64-bit seed for `(seed, label, index)` — for places that record
/// the seed itself (for example per-tree bootstrap seeds in a saved model).
pub fn child_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut state = mix(seed, label, index);
    splitmix64(&mut state)
}
