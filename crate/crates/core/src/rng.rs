//! Deterministic random streams.
//!
//! Every random draw comes from a ChaCha8 generator seeded with the user seed
//! and positioned on a stream id. Stream ids pack a replicate index, a lane
//! (what the stream is used for) and a sub-index (extension number, λ index),
//! so parallel replicates and successive extensions never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Lane {
    Points = 1,
    PointExtension = 2,
    Lines = 3,
    LineExtension = 4,
    Nucleus = 5,
    Direction = 6,
    Domain = 7,
}

/// Pack `(replicate, lane, index)` into a stream id.
pub fn stream_id(replicate: u64, lane: Lane, index: u32) -> u64 {
    assert!(replicate < 1 << 32, "replicate index too large");
    (replicate << 32) | ((lane as u64) << 24) | (index as u64 & 0x00ff_ffff)
}

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
