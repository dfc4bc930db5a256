//! Reproducible random streams.
//!
//! Every chain, bootstrap or sampler draws from its own ChaCha stream keyed by
//! `(seed, stream id)`. Streams are independent of scheduling, so results do
//! not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Counter-mode split of a master seed.
pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Sub-stream identifiers for distinct purposes sharing one seed.
pub mod purpose {
    pub const CHAIN: u64 = 0;
    pub const BOOTSTRAP: u64 = 1 << 40;
    pub const SYNTHETIC: u64 = 2 << 40;
    pub const CROSSING: u64 = 3 << 40;
}
