//! Tracking drifting least-squares solutions with O(d) stochastic gradient
//! steps, and the linear bandit policies built on top of them.
//!
//! The crate is organised around one data flow: samples `(x, y)` enter an
//! append-only buffer, exact solvers ([`exact`]) maintain the normal
//! equations, and trackers ([`trackers`]) chase the same solutions with
//! constant-per-step updates. [`bandits`] wires both into PEGE and LinUCB;
//! [`bounds`] and [`metrics`] evaluate and measure the tracking error.

pub mod bandits;
pub mod bounds;
pub mod env;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod schedule;
pub mod trackers;

pub use error::{Error, Result};
