use rand::Rng;

use super::{sample_grad, DataBuffer, Iterate};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot};

/// Stochastic variance-reduced gradient tracker.
///
/// The anchor `theta_bar` and its full gradient are refreshed at the start of
/// every epoch. An epoch lasts `epoch_factor * len` steps, with `len` the
/// buffer length at the refresh, so the amortized cost stays O(d) per step.
/// Samples appended mid-epoch are sampled but only enter the full gradient at
/// the next refresh.
#[derive(Debug, Clone)]
pub struct SvrgState {
    theta: Vec<f64>,
    anchor: Vec<f64>,
    full_grad: Vec<f64>,
    anchor_valid: bool,
    epoch_factor: usize,
    epoch_len: usize,
    steps_in_epoch: usize,
    epochs: u64,
    n_steps: u64,
    scratch: Vec<f64>,
}

impl SvrgState {
    pub fn new(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
            anchor: vec![0.0; dim],
            full_grad: vec![0.0; dim],
            anchor_valid: false,
            epoch_factor: 2,
            epoch_len: 0,
            steps_in_epoch: 0,
            epochs: 0,
            n_steps: 0,
            scratch: vec![0.0; dim],
        }
    }

    pub fn with_epoch_factor(mut self, factor: usize) -> Self {
        self.epoch_factor = factor.max(1);
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

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn full_grad(&self) -> &[f64] {
        &self.full_grad
    }

    pub fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    /// Number of anchor refreshes so far.
    pub fn epochs(&self) -> u64 {
        self.epochs
    }

    /// True when the next step will refresh the anchor.
    pub fn at_epoch_boundary(&self) -> bool {
        !self.anchor_valid || self.steps_in_epoch >= self.epoch_len
    }

    /// Sets `theta_bar = theta` and recomputes `F'(theta_bar)` over the buffer.
    pub fn reset_anchor(&mut self, buf: &DataBuffer, lambda: f64) -> Result<()> {
        if buf.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        self.anchor.copy_from_slice(&self.theta);
        self.full_grad.iter_mut().for_each(|g| *g = 0.0);
        for (x, y) in buf.iter() {
            sample_grad(x, y, &self.anchor, lambda, &mut self.scratch);
            for (g, s) in self.full_grad.iter_mut().zip(&self.scratch) {
                *g += s;
            }
        }
        let inv_n = 1.0 / buf.len() as f64;
        self.full_grad.iter_mut().for_each(|g| *g *= inv_n);
        self.anchor_valid = true;
        self.epoch_len = self.epoch_factor * buf.len();
        self.steps_in_epoch = 0;
        self.epochs += 1;
        Ok(())
    }

    /// `theta -= gamma (f'_i(theta) - f'_i(theta_bar) + F'(theta_bar))`
    pub fn svrg_step<R: Rng + ?Sized>(
        &mut self,
        buf: &DataBuffer,
        lambda: f64,
        gamma: f64,
        rng: &mut R,
    ) -> Result<()> {
        if buf.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        if self.at_epoch_boundary() {
            self.reset_anchor(buf, lambda)?;
        }
        let i = buf.draw(rng)?;
        let x = buf.x(i);
        // f'_i(theta) - f'_i(theta_bar) = (x'(theta - theta_bar)) x + lambda (theta - theta_bar)
        let c = dot(x, &self.theta) - dot(x, &self.anchor);
        for j in 0..self.theta.len() {
            let corr = c * x[j] + lambda * (self.theta[j] - self.anchor[j]);
            self.theta[j] -= gamma * (corr + self.full_grad[j]);
        }
        self.steps_in_epoch += 1;
        self.n_steps += 1;
        if !all_finite(&self.theta) {
            return Err(Error::Contract(format!("SVRG iterate diverged at step {}", self.n_steps)));
        }
        Ok(())
    }
}

impl Iterate for SvrgState {
    fn iterate(&self) -> &[f64] {
        &self.theta
    }

    fn steps(&self) -> u64 {
        self.n_steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::RlsState;
    use crate::linalg::dist;
    use crate::rng::rng_for;
    use crate::schedule::RegSchedule;

    fn buffer() -> DataBuffer {
        let mut b = DataBuffer::new(2);
        b.push(&[1.0, 0.0], 0.5).unwrap();
        b.push(&[0.0, 1.0], -0.3).unwrap();
        b.push(&[0.6, 0.8], 0.2).unwrap();
        b
    }

    #[test]
    fn at_anchor_step_is_full_gradient_step() {
        let buf = buffer();
        let mut s = SvrgState::new(2).with_theta(vec![0.2, 0.1]);
        s.svrg_step(&buf, 0.1, 0.05, &mut rng_for(0, 0)).unwrap();
        let mut full = vec![0.0; 2];
        let mut g = vec![0.0; 2];
        for (x, y) in buf.iter() {
            sample_grad(x, y, &[0.2, 0.1], 0.1, &mut g);
            full[0] += g[0] / 3.0;
            full[1] += g[1] / 3.0;
        }
        assert!((s.theta()[0] - (0.2 - 0.05 * full[0])).abs() < 1e-15);
        assert!((s.theta()[1] - (0.1 - 0.05 * full[1])).abs() < 1e-15);
    }

    #[test]
    fn stationary_at_exact_solution() {
        let buf = buffer();
        let lambda = 0.25;
        let mut rls = RlsState::new(2, RegSchedule::Constant(lambda));
        for (x, y) in buf.iter() {
            rls.append_xy(x, y).unwrap();
        }
        let star = rls.solution().unwrap();
        let mut s = SvrgState::new(2).with_theta(star.clone());
        let mut rng = rng_for(5, 0);
        for _ in 0..20 {
            s.svrg_step(&buf, lambda, 0.1, &mut rng).unwrap();
        }
        assert!(dist(s.theta(), &star) < 1e-13);
    }

    #[test]
    fn epoch_length_tracks_buffer() {
        let mut buf = buffer();
        let mut s = SvrgState::new(2);
        let mut rng = rng_for(1, 0);
        s.svrg_step(&buf, 0.0, 0.01, &mut rng).unwrap();
        assert_eq!(s.epoch_len(), 6);
        buf.push(&[0.3, 0.3], 0.0).unwrap();
        for _ in 0..5 {
            s.svrg_step(&buf, 0.0, 0.01, &mut rng).unwrap();
        }
        assert_eq!(s.epochs(), 1);
        s.svrg_step(&buf, 0.0, 0.01, &mut rng).unwrap();
        assert_eq!(s.epochs(), 2);
        assert_eq!(s.epoch_len(), 8);
    }

    #[test]
    fn empty_buffer_is_rejected() {
        let mut s = SvrgState::new(2);
        assert!(matches!(
            s.svrg_step(&DataBuffer::new(2), 0.0, 0.1, &mut rng_for(0, 0)),
            Err(Error::EmptyBuffer)
        ));
    }
}
