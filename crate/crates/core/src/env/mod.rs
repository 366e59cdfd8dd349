//! Synthetic linear-reward environments, arm generation, the JSON-lines event
//! log, and a synthetic news-click stream.
//!
//! Every admitted action satisfies `||x||_2 <= 1` and every noise model is
//! zero-mean with `|xi| <= 1`.

mod arms;
mod eventlog;
mod news;

pub use arms::{gen_arm_set, random_unit_vector, Arm, ArmGenerator, ArmSetSpec};
pub use eventlog::{read_event_log, write_event_log, EventLogReader, EventRecord};
pub use news::{
    generate_news_stream, read_truth, synth_news_stream, truth_path, NewsClickModel, NewsStreamConfig,
    Truth,
};

use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dot, norm2, Matrix};

/// Slack allowed on `||x|| <= 1` for floating-point features.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    Zero,
    /// Uniform on `(-1, 1)`.
    Uniform,
    Rademacher,
    /// Gaussian with scale `sigma`, rejection-truncated to `[-1, 1]`.
    TruncGauss { sigma: f64 },
}

impl NoiseModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Zero => 0.0,
            NoiseModel::Uniform => rng.random_range(-1.0..1.0),
            NoiseModel::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseModel::TruncGauss { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("sigma validated on construction");
                loop {
                    let v: f64 = normal.sample(rng);
                    if v.abs() <= 1.0 {
                        return v;
                    }
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::TruncGauss { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidConfig(format!("truncated gaussian needs sigma > 0, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// `zero | uniform | rademacher | gauss:<sigma>`
    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "zero" | "none" => NoiseModel::Zero,
            "uniform" => NoiseModel::Uniform,
            "rademacher" => NoiseModel::Rademacher,
            _ => match s.strip_prefix("gauss:") {
                Some(sig) => NoiseModel::TruncGauss {
                    sigma: sig
                        .parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad sigma in noise model {s:?}")))?,
                },
                None => return Err(Error::InvalidConfig(format!("unknown noise model {s:?}"))),
            },
        };
        m.validate()?;
        Ok(m)
    }
}

/// The set `D` of admissible actions.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSet {
    UnitSphere,
    /// Any `x` with `||x|| <= 1`; used when per-round finite arm sets are
    /// drawn from the unit ball.
    UnitBall,
    /// `{x : x'Qx <= 1}` with `lambda_min(Q) >= 1`, so the set sits inside the unit ball.
    Ellipsoid { q: Matrix, q_inv: Matrix },
    Finite(Vec<Vec<f64>>),
}

impl ActionSet {
    pub fn ellipsoid(q: Matrix) -> Result<Self> {
        let lmin = linalg::min_eigenvalue(&q)?;
        if lmin < 1.0 - NORM_TOL {
            return Err(Error::InvalidConfig(format!(
                "ellipsoid shape must have lambda_min >= 1 to stay in the unit ball, got {lmin}"
            )));
        }
        let q_inv = linalg::inverse_spd(&q)?;
        Ok(ActionSet::Ellipsoid { q, q_inv })
    }

    pub fn finite(arms: Vec<Vec<f64>>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidConfig("finite action set is empty".into()));
        }
        let d = arms[0].len();
        for a in &arms {
            check_dim(d, a.len())?;
            if norm2(a) > 1.0 + NORM_TOL {
                return Err(Error::InvalidConfig(format!("arm norm {} exceeds 1", norm2(a))));
            }
        }
        Ok(ActionSet::Finite(arms))
    }

    pub fn admits(&self, x: &[f64]) -> bool {
        if !linalg::all_finite(x) || norm2(x) > 1.0 + NORM_TOL {
            return false;
        }
        match self {
            ActionSet::UnitSphere => (norm2(x) - 1.0).abs() <= NORM_TOL,
            ActionSet::UnitBall => true,
            ActionSet::Ellipsoid { q, .. } => q.dim() == x.len() && q.quad_form(x) <= 1.0 + NORM_TOL,
            ActionSet::Finite(arms) => arms
                .iter()
                .any(|a| a.len() == x.len() && linalg::dist(a, x) <= 1e-12),
        }
    }

    /// `max_{x in D} x' theta`
    pub fn support(&self, theta: &[f64]) -> f64 {
        match self {
            ActionSet::UnitSphere | ActionSet::UnitBall => norm2(theta),
            ActionSet::Ellipsoid { q_inv, .. } => q_inv.quad_form(theta).max(0.0).sqrt(),
            ActionSet::Finite(arms) => arms
                .iter()
                .map(|a| dot(a, theta))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Linear reward environment `y = x' theta* + xi`.
#[derive(Debug, Clone)]
pub struct LinearEnv {
    theta_star: Vec<f64>,
    noise: NoiseModel,
    actions: ActionSet,
}

impl LinearEnv {
    pub fn new(theta_star: Vec<f64>, noise: NoiseModel, actions: ActionSet) -> Result<Self> {
        noise.validate()?;
        if !linalg::all_finite(&theta_star) || theta_star.is_empty() {
            return Err(Error::InvalidConfig("theta* must be a finite, non-empty vector".into()));
        }
        match &actions {
            ActionSet::Ellipsoid { q, .. } => check_dim(theta_star.len(), q.dim())?,
            ActionSet::Finite(arms) => check_dim(theta_star.len(), arms[0].len())?,
            _ => {}
        }
        Ok(Self {
            theta_star,
            noise,
            actions,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn mean_reward(&self, x: &[f64]) -> f64 {
        dot(x, &self.theta_star)
    }

    /// Value of the best action, `max_{x in D} x' theta*`.
    pub fn best_value(&self) -> f64 {
        self.actions.support(&self.theta_star)
    }

    pub fn sample_reward<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        if !self.actions.admits(x) {
            return Err(Error::Contract(format!(
                "action with norm {} is not in the action set",
                norm2(x)
            )));
        }
        Ok(self.mean_reward(x) + self.noise.sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn noise_is_bounded() {
        let mut rng = rng_for(1, 0);
        for m in [
            NoiseModel::Uniform,
            NoiseModel::Rademacher,
            NoiseModel::TruncGauss { sigma: 0.8 },
        ] {
            for _ in 0..10_000 {
                assert!(m.sample(&mut rng).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn zero_noise_reward_is_exact() {
        let env = LinearEnv::new(vec![0.3, -0.4], NoiseModel::Zero, ActionSet::UnitSphere).unwrap();
        let y = env.sample_reward(&[0.6, 0.8], &mut rng_for(0, 0)).unwrap();
        assert_eq!(y, 0.3 * 0.6 - 0.4 * 0.8);
    }

    #[test]
    fn inadmissible_action_is_rejected() {
        let env = LinearEnv::new(vec![1.0, 0.0], NoiseModel::Uniform, ActionSet::UnitSphere).unwrap();
        assert!(env.sample_reward(&[0.5, 0.0], &mut rng_for(0, 0)).is_err());
        assert!(env.sample_reward(&[1.0, 1.0], &mut rng_for(0, 0)).is_err());
        let ball = LinearEnv::new(vec![1.0, 0.0], NoiseModel::Uniform, ActionSet::UnitBall).unwrap();
        assert!(ball.sample_reward(&[0.5, 0.0], &mut rng_for(0, 0)).is_ok());
    }

    #[test]
    fn parse_noise_models() {
        assert_eq!("uniform".parse::<NoiseModel>().unwrap(), NoiseModel::Uniform);
        assert_eq!(
            "gauss:0.25".parse::<NoiseModel>().unwrap(),
            NoiseModel::TruncGauss { sigma: 0.25 }
        );
        assert!("gauss:-1".parse::<NoiseModel>().is_err());
        assert!("cauchy".parse::<NoiseModel>().is_err());
    }

    #[test]
    fn ellipsoid_must_fit_in_ball() {
        assert!(ActionSet::ellipsoid(Matrix::diag(&[0.5, 2.0])).is_err());
        let e = ActionSet::ellipsoid(Matrix::diag(&[4.0, 1.0])).unwrap();
        assert!(e.admits(&[0.5, 0.0]));
        assert!(!e.admits(&[0.6, 0.0]));
        assert!((e.support(&[1.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn best_value_matches_support() {
        let env = LinearEnv::new(vec![3.0, 4.0], NoiseModel::Zero, ActionSet::UnitSphere).unwrap();
        assert_eq!(env.best_value(), 5.0);
        let fin = ActionSet::finite(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let env = LinearEnv::new(vec![3.0, 4.0], NoiseModel::Zero, fin).unwrap();
        assert_eq!(env.best_value(), 4.0);
    }
}
