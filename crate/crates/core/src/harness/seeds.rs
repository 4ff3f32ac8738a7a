//! Counter-based seed derivation.
//!
//! Every random stream of a run is keyed by `(master seed, trial, stream)`,
//! so trial order and thread count never change what a trial draws.

/// SplitMix64 finalizer.
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Combines a parent seed with a counter into a child seed.
pub fn mix(parent: u64, counter: u64) -> u64 {
    finalize(parent ^ finalize(counter.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Independent random streams used by one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    AccessPoints = 1,
    Users = 2,
    Shadowing = 3,
    Fading = 4,
    Scheduler = 5,
}

/// Seed of `stream` in `trial`.
pub fn trial_seed(master: u64, trial: u64, stream: Stream) -> u64 {
    mix(mix(master, trial), stream as u64)
}

/// Seed of a stream that is shared by all trials (for example a fixed AP
/// deployment).
pub fn shared_seed(master: u64, stream: Stream) -> u64 {
    mix(mix(master, u64::MAX), stream as u64)
}
