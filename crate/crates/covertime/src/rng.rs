//! Reproducible random-number substreams.
//!
//! Every stochastic routine draws from a ChaCha8 stream selected by
//! `(seed, stream index)`. ChaCha is a counter-mode generator, so distinct
//! stream indices give statistically independent sequences from one seed and
//! a trial's randomness never depends on how work was scheduled across
//! threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for substream `index` of the master `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
