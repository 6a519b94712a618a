//! Seeded randomness. Every random object is a function of `(seed, stream)`
//! so that independent quantities drawn for the same trial never share a
//! ChaCha stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod stream {
    pub const EDGES: u64 = 1;
    pub const PLANTED_MAP: u64 = 2;
    pub const SAMPLER: u64 = 3;
    pub const LANDSCAPE: u64 = 4;
    pub const TEST: u64 = 99;
}

pub fn rng(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}
