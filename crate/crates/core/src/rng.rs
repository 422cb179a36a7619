//! Seeded random streams.
//!
//! Every stochastic component owns its own ChaCha8 stream derived from the
//! experiment seed, so adding draws in one component never shifts another.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

pub type SimRng = rand_chacha::ChaCha8Rng;

/// Stream ids used when deriving generators from one experiment seed.
pub mod streams {
    pub const CLUSTER: u64 = 1;
    pub const RAFT: u64 = 2;
    pub const AGENT: u64 = 3;
    pub const INIT: u64 = 4;
    pub const EPISODES: u64 = 5;
}

pub fn seeded(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
pub fn standard_normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

/// SplitMix64 finalizer; used to derive per-episode seeds.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Environment seed for episode `episode` of an experiment seeded with `seed`.
pub fn episode_seed(seed: u64, episode: usize) -> u64 {
    mix(seed, (streams::EPISODES << 32) ^ episode as u64)
}
