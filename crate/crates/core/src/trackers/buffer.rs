use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::exact::Sample;
use crate::linalg::all_finite;

/// Append-only history of `(x, y)` pairs stored contiguously.
#[derive(Debug, Clone)]
pub struct DataBuffer {
    dim: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl DataBuffer {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            xs: Vec::new(),
            ys: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        Self {
            dim,
            xs: Vec::with_capacity(dim * cap),
            ys: Vec::with_capacity(cap),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        check_dim(self.dim, x.len())?;
        if !all_finite(x) || !y.is_finite() {
            return Err(Error::Contract("sample has non-finite entries".into()));
        }
        self.xs.extend_from_slice(x);
        self.ys.push(y);
        Ok(())
    }

    pub fn push_sample(&mut self, s: &Sample) -> Result<()> {
        self.push(&s.x, s.y)
    }

    /// Feature of the 0-based entry `i`.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn get(&self, i: usize) -> Sample {
        Sample::new(self.x(i).to_vec(), self.y(i))
    }

    /// Uniform 0-based index over the current contents.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok(rng.random_range(0..self.len()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.xs.chunks_exact(self.dim).zip(self.ys.iter().copied())
    }
}
