//! Seed splitting.
//!
//! Every random stream is a ChaCha8 generator keyed by the user seed, with the
//! 64-bit ChaCha stream id selecting an independent sequence. Experiments
//! derive the stream id from the cell index and the trial (or chunk) index via
//! [`stream_id`], so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `trial` of experiment cell `cell`: the cell index
/// occupies the high 24 bits, the trial index the low 40.
pub fn stream_id(cell: u32, trial: u64) -> u64 {
    debug_assert!(trial < (1 << 40));
    debug_assert!(cell < (1 << 24));
    ((cell as u64) << 40) | trial
}
