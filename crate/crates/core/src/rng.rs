//! Seeded random streams.
//!
//! Every episode derives its randomness from a single `u64` seed through the
//! ChaCha8 generator, one stream per consumer. Streams are independent of
//! each other, so e.g. adding a policy never shifts the contexts other
//! policies see under the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name of the generator, as written in experiment configs.
pub const GENERATOR: &str = "chacha8";

pub type EpisodeRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Arm scale factors and parameter vectors.
    Env = 0,
    /// Per-round contexts.
    Contexts = 1,
    /// Reward noise.
    Noise = 2,
    /// Policy-internal randomness (uniform baseline).
    Policy = 3,
}

pub fn stream(seed: u64, which: Stream) -> EpisodeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
