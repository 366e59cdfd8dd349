use rand::Rng;

use super::{DataBuffer, Iterate};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, axpy, dot};
use crate::schedule::{RegSchedule, StepSchedule};

/// Running mean of the iterates produced after a burn-in.
#[derive(Debug, Clone)]
pub struct Averager {
    burn_in: u64,
    mean: Vec<f64>,
    count: u64,
}

impl Averager {
    pub fn new(dim: usize, burn_in: u64) -> Self {
        Self {
            burn_in,
            mean: vec![0.0; dim],
            count: 0,
        }
    }

    fn observe(&mut self, step: u64, theta: &[f64]) {
        if step <= self.burn_in {
            return;
        }
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for (m, t) in self.mean.iter_mut().zip(theta) {
            *m += w * (t - *m);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }
}

/// Plain SGD tracker used by fOLS-GD and fRLS-GD.
#[derive(Debug, Clone)]
pub struct Tracker {
    theta: Vec<f64>,
    n_steps: u64,
    schedule: StepSchedule,
    reg: RegSchedule,
    avg: Option<Averager>,
}

impl Tracker {
    pub fn new(dim: usize, schedule: StepSchedule) -> Self {
        Self {
            theta: vec![0.0; dim],
            n_steps: 0,
            schedule,
            reg: RegSchedule::Zero,
            avg: None,
        }
    }

    pub fn with_reg(mut self, reg: RegSchedule) -> Self {
        self.reg = reg;
        self
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), self.theta.len());
        self.theta = theta;
        self
    }

    /// Enables Polyak averaging of the iterates after `burn_in` steps.
    pub fn with_averaging(mut self, burn_in: u64) -> Self {
        self.avg = Some(Averager::new(self.theta.len(), burn_in));
        self
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn averaged(&self) -> Option<&[f64]> {
        self.avg.as_ref().map(Averager::mean)
    }

    /// Averaged iterate when averaging is on and has started, else `theta`.
    pub fn estimate(&self) -> &[f64] {
        match &self.avg {
            Some(a) if a.count() > 0 => a.mean(),
            _ => &self.theta,
        }
    }

    pub fn schedule(&self) -> StepSchedule {
        self.schedule
    }

    pub fn reg(&self) -> RegSchedule {
        self.reg
    }

    /// One fOLS-GD step: `theta += gamma_n (y_i - theta'x_i) x_i`.
    pub fn fols_step<R: Rng + ?Sized>(&mut self, buf: &DataBuffer, rng: &mut R) -> Result<()> {
        let i = buf.draw(rng)?;
        self.update(buf.x(i), buf.y(i), 0.0)
    }

    /// One fRLS-GD step with `lambda_n` evaluated at the buffer length.
    pub fn frls_step<R: Rng + ?Sized>(&mut self, buf: &DataBuffer, rng: &mut R) -> Result<()> {
        let i = buf.draw(rng)?;
        let lambda = self.reg.lambda(buf.len());
        self.update(buf.x(i), buf.y(i), lambda)
    }

    /// Deterministic update on a given sample:
    /// `theta += gamma_n ((y - theta'x) x - lambda theta)`.
    pub fn update(&mut self, x: &[f64], y: f64, lambda: f64) -> Result<()> {
        check_dim(self.theta.len(), x.len())?;
        self.n_steps += 1;
        let gamma = self.schedule.gamma(self.n_steps);
        let resid = y - dot(&self.theta, x);
        if lambda != 0.0 {
            let shrink = 1.0 - gamma * lambda;
            self.theta.iter_mut().for_each(|t| *t *= shrink);
        }
        axpy(gamma * resid, x, &mut self.theta);
        if let Some(avg) = self.avg.as_mut() {
            avg.observe(self.n_steps, &self.theta);
        }
        if !all_finite(&self.theta) {
            return Err(Error::Contract(format!("iterate diverged at step {}", self.n_steps)));
        }
        Ok(())
    }
}

impl Iterate for Tracker {
    fn iterate(&self) -> &[f64] {
        self.estimate()
    }

    fn steps(&self) -> u64 {
        self.n_steps
    }
}
