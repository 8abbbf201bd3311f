//! Seeded random streams.
//!
//! Every experiment carries one 64-bit master seed. Independent streams are
//! derived from it by keying a ChaCha8 generator with the master seed and
//! selecting the ChaCha stream number `stream`. Streams with distinct numbers
//! never overlap, and the same `(master, stream)` pair always yields the same
//! sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` of master seed `master`.
pub fn stream_rng(master: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Packs a trial index and a role tag into one stream number:
/// `trial << 16 | role`.
pub fn stream_id(trial: u64, role: u16) -> u64 {
    (trial << 16) | role as u64
}
