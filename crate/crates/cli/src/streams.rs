//! Synthetic sample streams for tracking experiments.

use std::str::FromStr;

use driftls::env::{random_unit_vector, NoiseModel};
use driftls::linalg::{axpy, dot, norm2};
use driftls::rng::{rng_for, stream, ExpRng};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// Cycles through a random orthonormal basis `u_1..u_d`, so that
    /// `lambda_min(A_bar_n) >= 1/(2d)` for every `n >= d`.
    Cyclic,
    /// Independent uniform directions on the unit sphere.
    Sphere,
}

impl FromStr for StreamKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(StreamKind::Cyclic),
            "sphere" => Ok(StreamKind::Sphere),
            _ => Err(CliError::Config(format!("unknown stream '{s}' (expected cyclic|sphere)"))),
        }
    }
}

/// Infinite stream of `(x_n, x_n'theta* + xi_n)`.
#[derive(Debug, Clone)]
pub struct Stream {
    kind: StreamKind,
    basis: Vec<Vec<f64>>,
    theta_star: Vec<f64>,
    noise: NoiseModel,
    feat_rng: ExpRng,
    noise_rng: ExpRng,
    n: u64,
}

impl Stream {
    pub fn new(kind: StreamKind, d: usize, noise: NoiseModel, theta_norm: f64, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(CliError::Config("d must be >= 1".into()));
        }
        noise.validate()?;
        let mut feat_rng = rng_for(seed, stream::FEATURES);
        let basis = match kind {
            StreamKind::Cyclic => orthonormal_basis(d, &mut feat_rng),
            StreamKind::Sphere => Vec::new(),
        };
        let theta_star = random_unit_vector(d, &mut rng_for(seed, stream::PROBLEM))
            .into_iter()
            .map(|v| v * theta_norm)
            .collect();
        Ok(Self {
            kind,
            basis,
            theta_star,
            noise,
            feat_rng,
            noise_rng: rng_for(seed, stream::NOISE),
            n: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    /// Strong-convexity constant that holds for `n >= d` on the cyclic stream.
    pub fn mu(&self) -> f64 {
        1.0 / (2.0 * self.dim() as f64)
    }

    pub fn next_sample(&mut self) -> (Vec<f64>, f64) {
        let x = match self.kind {
            StreamKind::Cyclic => self.basis[(self.n % self.basis.len() as u64) as usize].clone(),
            StreamKind::Sphere => random_unit_vector(self.dim(), &mut self.feat_rng),
        };
        self.n += 1;
        let y = dot(&x, &self.theta_star) + self.noise.sample(&mut self.noise_rng);
        (x, y)
    }
}

/// Gram-Schmidt on Gaussian directions.
fn orthonormal_basis(d: usize, rng: &mut ExpRng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = random_unit_vector(d, rng);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let n = norm2(&v);
        if n > 1e-6 {
            v.iter_mut().for_each(|c| *c /= n);
            basis.push(v);
        }
    }
    basis
}
