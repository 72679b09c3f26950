//! Seeded, counter-based randomness.
//!
//! Every random decision in the crate goes through a ChaCha8 stream keyed by
//! a 64-bit seed, so results depend only on the seed and never on thread
//! scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn generator(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child seed for `stream` under `master`, read from ChaCha stream `stream`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut gen = ChaCha8Rng::seed_from_u64(master);
    gen.set_stream(stream);
    gen.next_u64()
}
