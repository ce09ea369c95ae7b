//! Seeded RNG substreams.
//!
//! Every random draw in a run comes from a stream keyed by
//! `(run seed, robot id, purpose)`. Streams never share state, so the order
//! in which robots or modules are updated cannot perturb anyone else's draws
//! and per-robot updates may be reordered or parallelized freely.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::RobotId;

/// Marker for streams not tied to a single robot.
pub const GLOBAL: RobotId = RobotId::MAX;

/// What a stream is consumed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamKind {
    /// Tile color permutation.
    EnvLayout = 0,
    /// Initial robot placement and headings.
    Placement = 1,
    /// Initial opinion shuffle.
    InitialOpinion = 2,
    /// Initial leader pick (fixed-leader mode).
    LeaderPick = 3,
    /// Random-walk phase durations and turn directions.
    Motion = 4,
    /// Ground-sensor noise flips.
    GroundNoise = 5,
    /// Decision-loop draws: phase durations and opinion adoption.
    Decision = 6,
    /// Membership draws at role expiry.
    Membership = 7,
    /// Fault trials.
    FaultTrial = 8,
    /// Per-receiver message drop draws.
    Delivery = 9,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the 64-bit seed of one substream.
pub fn substream_seed(seed: u64, robot: RobotId, kind: StreamKind) -> u64 {
    let key = ((robot as u64) << 8) | kind as u64;
    splitmix64(seed ^ splitmix64(key))
}

/// RNG for a per-robot stream.
pub fn robot_stream(seed: u64, robot: RobotId, kind: StreamKind) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(seed, robot, kind))
}

/// RNG for a run-global stream.
pub fn global_stream(seed: u64, kind: StreamKind) -> ChaCha8Rng {
    robot_stream(seed, GLOBAL, kind)
}

/// Draws from an exponential distribution with the given mean (seconds).
pub fn sample_exp_mean(rng: &mut impl Rng, mean: f64) -> f64 {
    debug_assert!(mean > 0.0);
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}
