//! Deterministic per-run random streams.
//!
//! Every stochastic run owns a ChaCha8 stream keyed by
//! `(master_seed, purpose, group, run)`, so results do not depend on the
//! order in which runs execute or on how many threads execute them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Ensemble = 0,
    Trajectory = 1,
    RandomWalk = 2,
    Nonlinear = 3,
    FirstPassage = 4,
}

/// Stream for run `run` of group `group` (typically the initial-condition index).
pub fn stream(master_seed: u64, purpose: Purpose, group: u32, run: u32) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    let group = u64::from(group) & 0x00ff_ffff;
    rng.set_stream(((purpose as u64) << 56) | (group << 32) | u64::from(run));
    rng
}
