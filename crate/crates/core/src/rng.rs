//! Seeded random streams.
//!
//! Every parallel task draws from its own ChaCha8 stream keyed by
//! `(seed, purpose)` with the task index as the stream id, so output does not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SIMULATE: u64 = 1;
pub const BOOT_THETA: u64 = 2;
pub const BOOT_IQR: u64 = 3;
pub const MULTIPLIER: u64 = 4;
pub const WITNESS: u64 = 5;
pub const DESIGN: u64 = 6;

pub fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&purpose.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
