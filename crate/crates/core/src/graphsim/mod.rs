//! Discrete-time growth of the random graph sequence, leader tracking, the
//! coupled bound chains and the two-vertex race.

mod bounds;
mod grow;
mod race;

pub use bounds::{bound_process_lower, bound_process_upper, LowerBoundPath, UpperBoundPath};
pub use grow::{grow, leader_of, leader_statistics, Checkpoint, GrowOptions, GrowthState, LeaderStats, TrajectoryRecord};
pub use race::{race, two_clock_chain, RaceResult};
