//! Reproducible per-replicate random streams.
//!
//! Replicate `r` of a run seeded with `seed` always draws from ChaCha8 stream
//! `r` of key `seed`, so results do not depend on how replicates are spread
//! over worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for replicate `replicate` of the run keyed by `seed`.
pub fn substream(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}
