//! Seeded random streams.
//!
//! Every stochastic decision in a run draws from a [`Stream`] derived from the
//! run seed, so a `(config, seed)` pair fixes the whole trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream.
pub type Stream = ChaCha8Rng;

/// Independent sub-streams of one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    ActorInit = 1,
    CriticInit = 2,
    Policy = 3,
    InitialState = 4,
    Pseudopatterns = 5,
}

/// Stream for `purpose` under `seed`. Different purposes never share a stream.
pub fn stream(seed: u64, purpose: Purpose) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}

/// Plain stream from a seed.
pub fn from_seed(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn unit(rng: &mut Stream) -> f64 {
    rng.random::<f64>()
}

/// Uniform draw on `[lo, hi)`.
#[inline]
pub fn uniform(rng: &mut Stream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}
