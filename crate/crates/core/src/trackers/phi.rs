use rand::Rng;

use super::{DataBuffer, Iterate};
use crate::error::{check_dim, Result};
use crate::linalg::{all_finite, dot};

/// SGD estimate of `A_n^{-1} x` for one arm feature `x`, so that
/// `x' phi` approximates the LinUCB confidence width `x' A_n^{-1} x`.
#[derive(Debug, Clone)]
pub struct PhiState {
    phi: Vec<f64>,
    target_x: Vec<f64>,
    n_steps: u64,
}

impl PhiState {
    pub fn new(target_x: Vec<f64>) -> Self {
        Self {
            phi: vec![0.0; target_x.len()],
            target_x,
            n_steps: 0,
        }
    }

    pub fn with_phi(mut self, phi: Vec<f64>) -> Self {
        assert_eq!(phi.len(), self.phi.len());
        self.phi = phi;
        self
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn target_x(&self) -> &[f64] {
        &self.target_x
    }

    /// Points the tracker at a new feature while keeping `phi` as a warm start.
    pub fn retarget(&mut self, x: &[f64]) -> Result<()> {
        check_dim(self.target_x.len(), x.len())?;
        self.target_x.copy_from_slice(x);
        Ok(())
    }

    /// `x' phi`, unclamped.
    pub fn confidence(&self) -> f64 {
        dot(&self.target_x, &self.phi)
    }

    /// `phi += gamma (x / n - (phi'x_i) x_i)`
    pub fn phi_step<R: Rng + ?Sized>(&mut self, buf: &DataBuffer, gamma: f64, rng: &mut R) -> Result<()> {
        let i = buf.draw(rng)?;
        self.update(buf.x(i), buf.len(), gamma)
    }

    pub fn update(&mut self, xi: &[f64], n: usize, gamma: f64) -> Result<()> {
        check_dim(self.phi.len(), xi.len())?;
        let c = dot(&self.phi, xi);
        let inv_n = 1.0 / n.max(1) as f64;
        for ((p, t), x) in self.phi.iter_mut().zip(&self.target_x).zip(xi) {
            *p += gamma * (inv_n * t - c * x);
        }
        self.n_steps += 1;
        if !all_finite(&self.phi) {
            return Err(crate::Error::Contract("phi iterate diverged".into()));
        }
        Ok(())
    }
}

impl Iterate for PhiState {
    fn iterate(&self) -> &[f64] {
        &self.phi
    }

    fn steps(&self) -> u64 {
        self.n_steps
    }
}
