//! Seeded, splittable randomness. Every consumer derives its own stream from one 64-bit seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids for the library's consumers.
pub mod stream {
    pub const GENERATOR: u64 = 1;
    pub const DENSITY: u64 = 2;
    pub const SEPARATOR: u64 = 3;
    pub const QUERIES: u64 = 4;
}

/// Deterministic generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
