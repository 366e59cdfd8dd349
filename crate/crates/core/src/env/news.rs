//! Synthetic stand-in for a logged news-recommendation stream.
//!
//! The click model is an invention of this crate: an arm with feature `x` is
//! clicked with probability `clamp(x'theta* + 0.5 xi, 0, 1)`, `xi ~ U(-1, 1)`.
//! The logging policy picks uniformly among the offered arms, so the log
//! supports rejection-sampling replay.

use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{random_unit_vector, write_event_log, ArmGenerator, ArmSetSpec, EventRecord};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rng::{rng_for, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewsStreamConfig {
    pub d: usize,
    pub k: usize,
    pub horizon: u64,
    pub density: f64,
    pub fixed_pool: bool,
    pub theta_norm: f64,
}

impl Default for NewsStreamConfig {
    fn default() -> Self {
        Self {
            d: 20,
            k: 10,
            horizon: 10_000,
            density: 1.0,
            fixed_pool: true,
            theta_norm: 1.0,
        }
    }
}

/// Sidecar file holding the hidden parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub theta_star: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NewsClickModel {
    theta_star: Vec<f64>,
    noise_scale: f64,
}

impl NewsClickModel {
    pub fn new(theta_star: Vec<f64>) -> Self {
        Self {
            theta_star,
            noise_scale: 0.5,
        }
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn sample_click<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        let xi: f64 = rng.random_range(-1.0..1.0);
        let p = (dot(x, &self.theta_star) + self.noise_scale * xi).clamp(0.0, 1.0);
        if rng.random::<f64>() < p {
            1.0
        } else {
            0.0
        }
    }
}

/// Generates the records and the hidden parameter for `seed`.
pub fn generate_news_stream(cfg: &NewsStreamConfig, seed: u64) -> Result<(Vec<EventRecord>, Vec<f64>)> {
    if !(cfg.theta_norm >= 0.0 && cfg.theta_norm.is_finite()) {
        return Err(Error::InvalidConfig(format!("theta_norm must be >= 0, got {}", cfg.theta_norm)));
    }
    let spec = ArmSetSpec {
        d: cfg.d,
        k: cfg.k,
        density: cfg.density,
        fixed_pool: cfg.fixed_pool,
    };
    let mut arms_gen = ArmGenerator::new(spec)?;
    let theta_star: Vec<f64> = random_unit_vector(cfg.d, &mut rng_for(seed, stream::PROBLEM))
        .into_iter()
        .map(|v| v * cfg.theta_norm)
        .collect();
    let model = NewsClickModel::new(theta_star.clone());
    let mut arm_rng = rng_for(seed, stream::ARMS);
    let mut log_rng = rng_for(seed, stream::LOGGING);
    let mut click_rng = rng_for(seed, stream::NOISE);
    let mut records = Vec::with_capacity(cfg.horizon as usize);
    for t in 0..cfg.horizon {
        let arms = arms_gen.next_round(&mut arm_rng);
        let pick = log_rng.random_range(0..arms.len());
        let reward = model.sample_click(&arms[pick].x, &mut click_rng);
        records.push(EventRecord {
            t,
            chosen: Some(arms[pick].id),
            reward: Some(reward),
            arms,
        });
    }
    Ok((records, theta_star))
}

pub fn truth_path(log: &Path) -> PathBuf {
    let mut s = log.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

/// Writes the event log to `path` and the hidden parameter to `<path>.truth.json`.
pub fn synth_news_stream(cfg: &NewsStreamConfig, seed: u64, path: &Path) -> Result<Vec<f64>> {
    let (records, theta_star) = generate_news_stream(cfg, seed)?;
    write_event_log(path, &records)?;
    let truth = Truth {
        theta_star: theta_star.clone(),
    };
    std::fs::write(truth_path(path), serde_json::to_string(&truth)? + "\n")?;
    Ok(theta_star)
}

pub fn read_truth(log: &Path) -> Result<Truth> {
    let text = std::fs::read_to_string(truth_path(log))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_horizon_is_empty() {
        let cfg = NewsStreamConfig { horizon: 0, ..Default::default() };
        let (recs, theta) = generate_news_stream(&cfg, 1).unwrap();
        assert!(recs.is_empty());
        assert_eq!(theta.len(), cfg.d);
    }

    #[test]
    fn rewards_are_binary_and_chosen_is_offered() {
        let cfg = NewsStreamConfig { horizon: 500, density: 0.3, fixed_pool: false, ..Default::default() };
        let (recs, _) = generate_news_stream(&cfg, 2).unwrap();
        for r in &recs {
            assert!(matches!(r.reward, Some(v) if v == 0.0 || v == 1.0));
            assert!(r.validate().is_ok());
        }
    }
}
