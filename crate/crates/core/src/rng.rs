//! Seed derivation for reproducible parallel work.
//!
//! Every independent unit of work (a repetition, a projection direction, a
//! component of a simulated dataset) draws from its own ChaCha8 stream. The
//! stream is a pure function of `(seed, stream id)`, so results never depend
//! on how the work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for item `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_mul(GOLDEN_GAMMA) ^ 0x5851_f42d_4c95_7f2d))
}

/// Independent ChaCha8 stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const DIRECTION_TAG: u64 = 0x6469_7265_6374;

/// Dataset and direction seeds for repetition `rep` of an experiment.
pub fn repetition_seeds(seed: u64, rep: u64) -> (u64, u64) {
    let data = derive_seed(seed, rep);
    (data, derive_seed(data, DIRECTION_TAG))
}
