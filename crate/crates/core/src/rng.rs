//! Seeded random streams.
//!
//! A single run seed feeds every stochastic choice. Each consumer draws from
//! its own ChaCha stream so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named sub-streams of the run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Geometry,
    BathPhases,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Geometry => 1,
            Stream::BathPhases => 2,
        }
    }
}

/// Generator for `stream` with an extra `index` (e.g. a bath realization).
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream.id() << 32) ^ index);
    rng
}
