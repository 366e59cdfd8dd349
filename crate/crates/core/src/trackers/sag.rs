use rand::Rng;

use super::{sample_grad, DataBuffer, Iterate};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, axpy};

/// Stochastic average gradient tracker.
///
/// One gradient slot per buffer entry, zero-initialised; new buffer entries
/// get fresh zero slots. The step divides the gradient sum by the buffer
/// length unless `divide_by_seen` is set, in which case it divides by the
/// number of slots written so far.
#[derive(Debug, Clone)]
pub struct SagState {
    theta: Vec<f64>,
    memory: Vec<f64>,
    grad_sum: Vec<f64>,
    seen: Vec<bool>,
    seen_count: usize,
    divide_by_seen: bool,
    n_steps: u64,
    scratch: Vec<f64>,
}

impl SagState {
    pub fn new(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
            memory: Vec::new(),
            grad_sum: vec![0.0; dim],
            seen: Vec::new(),
            seen_count: 0,
            divide_by_seen: false,
            n_steps: 0,
            scratch: vec![0.0; dim],
        }
    }

    pub fn with_divide_by_seen(mut self, on: bool) -> Self {
        self.divide_by_seen = on;
        self
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), self.theta.len());
        self.theta = theta;
        self
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn grad_sum(&self) -> &[f64] {
        &self.grad_sum
    }

    pub fn slots(&self) -> usize {
        self.seen.len()
    }

    pub fn slot(&self, i: usize) -> &[f64] {
        let d = self.theta.len();
        &self.memory[i * d..(i + 1) * d]
    }

    pub fn is_seen(&self, i: usize) -> bool {
        self.seen[i]
    }

    /// Max-abs gap between `grad_sum` and the explicit sum of the slots.
    pub fn grad_sum_drift(&self) -> f64 {
        let d = self.theta.len();
        let mut explicit = vec![0.0; d];
        for slot in self.memory.chunks_exact(d) {
            axpy(1.0, slot, &mut explicit);
        }
        explicit
            .iter()
            .zip(&self.grad_sum)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn grow_to(&mut self, len: usize) {
        if len > self.seen.len() {
            self.memory.resize(len * self.theta.len(), 0.0);
            self.seen.resize(len, false);
        }
    }

    /// Replaces slot `i_n` with `f'_{i_n}(theta)` and steps along the
    /// averaged gradient.
    pub fn sag_step<R: Rng + ?Sized>(
        &mut self,
        buf: &DataBuffer,
        lambda: f64,
        gamma: f64,
        rng: &mut R,
    ) -> Result<()> {
        let i = buf.draw(rng)?;
        self.step_at(buf, i, lambda, gamma)
    }

    /// Same as [`Self::sag_step`] with the index supplied by the caller.
    pub fn step_at(&mut self, buf: &DataBuffer, i: usize, lambda: f64, gamma: f64) -> Result<()> {
        if buf.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        self.grow_to(buf.len());
        let d = self.theta.len();
        sample_grad(buf.x(i), buf.y(i), &self.theta, lambda, &mut self.scratch);
        let slot = &mut self.memory[i * d..(i + 1) * d];
        for ((s, g), old) in self.grad_sum.iter_mut().zip(&self.scratch).zip(slot.iter_mut()) {
            *s += g - *old;
            *old = *g;
        }
        if !self.seen[i] {
            self.seen[i] = true;
            self.seen_count += 1;
        }
        let denom = if self.divide_by_seen {
            self.seen_count
        } else {
            buf.len()
        };
        axpy(-gamma / denom as f64, &self.grad_sum, &mut self.theta);
        self.n_steps += 1;
        if !all_finite(&self.theta) {
            return Err(Error::Contract(format!("SAG iterate diverged at step {}", self.n_steps)));
        }
        Ok(())
    }
}

impl Iterate for SagState {
    fn iterate(&self) -> &[f64] {
        &self.theta
    }

    fn steps(&self) -> u64 {
        self.n_steps
    }
}
