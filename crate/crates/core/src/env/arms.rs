use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;

/// An arm offered in one round: a stable identifier plus its feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    pub id: u64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSetSpec {
    pub d: usize,
    pub k: usize,
    /// Probability that a coordinate is non-zero; 1.0 gives dense features.
    pub density: f64,
    /// Offer the same `k` arms every round instead of fresh features.
    pub fixed_pool: bool,
}

impl ArmSetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 {
            return Err(Error::InvalidConfig("arm sets need d >= 1 and K >= 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        Ok(())
    }
}

/// Uniformly distributed direction on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm2(&v);
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Unit-norm feature whose coordinates are non-zero with probability `density`
/// (at least one coordinate is always non-zero).
fn sparse_unit_vector<R: Rng + ?Sized>(d: usize, density: f64, rng: &mut R) -> Vec<f64> {
    if density >= 1.0 {
        return random_unit_vector(d, rng);
    }
    loop {
        let mut v = vec![0.0; d];
        for c in v.iter_mut() {
            if rng.random::<f64>() < density {
                *c = rng.sample(StandardNormal);
            }
        }
        let n = norm2(&v);
        if n > 1e-12 {
            v.iter_mut().for_each(|c| *c /= n);
            return v;
        }
    }
}

/// One round's arm set. Ids name the slot `0..K`; with a fixed pool the
/// features behind each id never change.
pub fn gen_arm_set<R: Rng + ?Sized>(spec: &ArmSetSpec, rng: &mut R) -> Vec<Arm> {
    (0..spec.k as u64)
        .map(|id| Arm {
            id,
            x: sparse_unit_vector(spec.d, spec.density, rng),
        })
        .collect()
}

/// Produces arm sets round after round, reusing the pool in fixed-pool mode.
#[derive(Debug, Clone)]
pub struct ArmGenerator {
    spec: ArmSetSpec,
    pool: Option<Vec<Arm>>,
}

impl ArmGenerator {
    pub fn new(spec: ArmSetSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec, pool: None })
    }

    pub fn spec(&self) -> &ArmSetSpec {
        &self.spec
    }

    pub fn next_round<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<Arm> {
        if !self.spec.fixed_pool {
            return gen_arm_set(&self.spec, rng);
        }
        if self.pool.is_none() {
            self.pool = Some(gen_arm_set(&self.spec, rng));
        }
        self.pool.clone().unwrap_or_default()
    }
}
