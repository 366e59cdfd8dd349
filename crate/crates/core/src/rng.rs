//! Seeded, splittable random streams.
//!
//! Every experiment is driven by one 64-bit seed. Independent consumers
//! (reward noise, index sampling, arm generation, ...) each get their own
//! ChaCha stream derived from that seed so adding draws to one consumer never
//! perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ExpRng = ChaCha8Rng;

/// Stream identifiers used across the crate.
pub mod stream {
    pub const NOISE: u64 = 1;
    pub const SAMPLING: u64 = 2;
    pub const ARMS: u64 = 3;
    pub const PROBLEM: u64 = 4;
    pub const FEATURES: u64 = 5;
    pub const LOGGING: u64 = 6;
    pub const PHI: u64 = 7;
}

pub fn rng_for(seed: u64, stream: u64) -> ExpRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
