//! Keyed random streams. A stream is a ChaCha8 generator seeded by the run
//! seed and positioned on a 64-bit stream id, so any (batch, chunk) or path
//! can be regenerated independently of scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for chunk `chunk` of batch `batch`.
pub fn batch_stream(batch: usize, chunk: usize) -> u64 {
    ((batch as u64) << 32) | chunk as u64
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn uniform_open<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Seed for a named sub-computation, derived from the run seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}
