//! Closed-loop simulation of visibility-aware target tracking.
//!
//! Scenario files, random target trajectories, episode runner, metrics,
//! output files and the batch runner behind the `vistrack` binary.

pub mod batch;
pub mod episode;
pub mod error;
pub mod metrics;
pub mod output;
pub mod scenario;
pub mod trajgen;

pub use error::{SimError, SimResult};

/// Random stream identifiers derived from an episode seed.
pub mod streams {
    pub const ROBOT: u64 = 1;
    pub const TARGET: u64 = 2;
    pub const SENSOR: u64 = 3;
    pub const INIT: u64 = 4;
    pub const GENERATOR: u64 = 5;
}
