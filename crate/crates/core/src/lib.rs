//! Visibility-aware target tracking in belief space.
//!
//! The crate is `no_std` with `alloc`. It carries the numerical core of the
//! tracker: planar convex geometry, motion and sensor models, an extended
//! Kalman filter for intermittent measurements, detection-probability
//! weighted covariance prediction, linearized signed-distance probabilities
//! and a sequential convex programming trajectory planner.
#![no_std]

extern crate alloc;

pub mod angle;
pub mod belief;
pub mod error;
pub mod estimator;
pub mod geom2d;
pub mod models;
pub mod planner;
pub mod possdf;

pub use error::{Error, Result};
