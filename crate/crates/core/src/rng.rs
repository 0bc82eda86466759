//! The single random-number source used by every stochastic operation.
//!
//! Generator: xoshiro256++ (Blackman & Vigna), seeded from a `u64` through
//! SplitMix64 exactly as `rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`
//! does. All derived quantities use fixed integer arithmetic so another
//! implementation can reproduce them bit for bit:
//!
//! * uniform `f64` in `[0, 1)`: `(next_u64() >> 11) * 2^-53`
//! * bounded integer in `[0, n)`: `(next_u64() as u128 * n) >> 64`
//! * standard normal: Box-Muller, `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`,
//!   one variate per pair of uniforms (the sine branch is discarded)
//! * shuffle: Fisher-Yates from the last index down, `j = bounded(i + 1)`
//!
//! Per-item seeds are derived with [`derive_seed`], which hashes the parent
//! seed, a stable string key and an index with SHA-256, so results never
//! depend on iteration or thread scheduling order.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct DetRng(Xoshiro256PlusPlus);

impl DetRng {
    pub fn new(seed: u64) -> Self {
        DetRng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn bounded(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.bounded(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Child seed from `(parent, key, index)`: the first eight bytes
/// (little-endian) of `SHA-256(parent_le || index_le || key_utf8)`.
pub fn derive_seed(parent: u64, key: &str, index: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(parent.to_le_bytes());
    hasher.update(index.to_le_bytes());
    hasher.update(key.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
