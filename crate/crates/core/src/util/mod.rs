//! Small shared utilities: deterministic point hashing and a seedable PRNG.

mod grid;
mod rng;

pub use grid::{PointKeyMap, SpatialHash};
pub use rng::SplitMix64;
