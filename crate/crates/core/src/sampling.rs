//! Seeded sampling shared by the split protocols and NUP negative sampling.
//!
//! The generator is ChaCha8. A 64-bit seed becomes the 256-bit key by
//! writing it little-endian into the first 8 bytes and zero-filling the
//! rest; the stream id selects an independent sequence under that key.
//! Indices are drawn with a partial Fisher-Yates shuffle where each draw
//! maps a raw `u64` `r` onto `[0, m)` as `(r * m) >> 64`. Both steps are
//! fully specified so manifests can be reproduced outside this crate.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        SeededRng { inner }
    }

    /// Uniform-ish index in `[0, bound)`; `bound` must be positive.
    pub fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.inner.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    /// `k` distinct indices from `0..n` in draw order (partial Fisher-Yates).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let k = k.min(n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }

    /// Like [`sample_indices`](Self::sample_indices) but sorted ascending,
    /// which restores the original order of the sampled items.
    pub fn sample_sorted(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut idx = self.sample_indices(n, k);
        idx.sort_unstable();
        idx
    }
}

impl SeededRng {
    /// Up to `k` indices from `0..n` that satisfy `keep`, in draw order.
    ///
    /// Runs the same partial Fisher-Yates shuffle as `sample_indices` but
    /// lazily, skipping rejected positions, so cost grows with the number
    /// of draws rather than with `n`.
    pub fn sample_where(&mut self, n: usize, k: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        let mut swapped: HashMap<usize, usize> = HashMap::new();
        let mut out = Vec::with_capacity(k);
        for i in 0..n {
            if out.len() == k {
                break;
            }
            let j = i + self.below(n - i);
            let at_j = *swapped.get(&j).unwrap_or(&j);
            let at_i = *swapped.get(&i).unwrap_or(&i);
            swapped.insert(j, at_i);
            if keep(at_j) {
                out.push(at_j);
            }
        }
        out
    }
}

/// 64-bit FNV-1a, used to derive stream ids from record keys.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
