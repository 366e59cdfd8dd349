//! O(d)-per-step stochastic trackers for drifting least-squares targets.
//!
//! Every tracker draws a uniformly random index from a shared, append-only
//! [`DataBuffer`] and performs one gradient-type update. None of them ever
//! touches a `d x d` matrix.

mod buffer;
mod phi;
mod sag;
mod sgd;
mod svrg;

pub use buffer::DataBuffer;
pub use phi::PhiState;
pub use sag::SagState;
pub use sgd::{Averager, Tracker};
pub use svrg::SvrgState;

use crate::linalg::dist;
use crate::metrics::{TraceSink, TrackingRecord};

/// Anything that maintains an iterate chasing a least-squares target.
pub trait Iterate {
    fn iterate(&self) -> &[f64];

    fn steps(&self) -> u64;

    /// Streams `(step, ||iterate - target||)` to a metrics sink.
    fn trace_to<S: TraceSink + ?Sized>(&self, target: &[f64], sink: &mut S) {
        sink.emit(TrackingRecord {
            n: self.steps(),
            err: dist(self.iterate(), target),
            wall_ns: 0,
        });
    }
}

/// Writes `f'_i(theta) = -(y - theta'x) x + lambda theta` into `out`.
pub(crate) fn sample_grad(x: &[f64], y: f64, theta: &[f64], lambda: f64, out: &mut [f64]) {
    let resid = y - crate::linalg::dot(theta, x);
    for ((o, xi), ti) in out.iter_mut().zip(x).zip(theta) {
        *o = -resid * xi + lambda * ti;
    }
}
