//! Seeded, stream-split random number generation. Every random choice in the
//! crate goes through here; there is no OS entropy anywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for `(seed, stream)`. Distinct streams never overlap,
/// so work keyed by stream number is reproducible regardless of scheduling.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
