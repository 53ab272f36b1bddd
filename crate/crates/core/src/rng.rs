//! Reproducible random streams for Monte Carlo work.
//!
//! Every random draw in a study comes from `stream(seed, replication, lane)`:
//! a ChaCha8 generator keyed by `seed` whose 64-bit stream id packs the
//! replication index (high 32 bits) and the lane (low 32 bits). Lane 0 is the
//! noise path, lane 1 the initial values of the iterative fit. Streams never
//! overlap, so results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const NOISE_LANE: u64 = 0;
pub const START_LANE: u64 = 1;

pub fn stream(seed: u64, replication: u64, lane: u64) -> SimRng {
    assert!(replication < 1 << 32 && lane < 1 << 32, "stream index overflow");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replication << 32) | lane);
    rng
}

/// SplitMix64 finalizer; derives independent child seeds from a parent.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
