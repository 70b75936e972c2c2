//! Deterministic random-number plumbing.
//!
//! Every independent unit of work (a shot, a trial) gets its own ChaCha8
//! stream derived from the run seed and the unit's index. Streams are
//! position-independent, so results are identical no matter how work is
//! scheduled across threads. The full contract, for reproducing byte-exact
//! output in another implementation:
//!
//! - Key: the 64-bit run seed, little-endian, in bytes 0..8 of the 32-byte
//!   ChaCha key; remaining bytes zero.
//! - Stream: the unit index, via `set_stream`.
//! - Uniform doubles: 53 random bits, `(next_u64 >> 11) * 2^-53`.
//! - Uniform bits: one double each, `u < 0.5`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RNG for work unit `task` of the run identified by `seed`.
pub fn shot_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(task);
    rng
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}

/// Fair coin, spending exactly one `uniform_f64` draw.
pub fn uniform_bit(rng: &mut ChaCha8Rng) -> bool {
    uniform_f64(rng) < 0.5
}
