//! Closed-form error and regret bound evaluators for SGD tracking with
//! step size `gamma_n = c / (4 (c + n))` under strong convexity `mu`.
//!
//! All logarithms are natural. The noise-variance constant inside `h(k)` is
//! fixed to 1, which is implied by `|xi| <= 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Lower bound on `lambda_min(A_bar_n)` for `n > n0`.
    pub mu: f64,
    /// Step-size constant.
    pub c: f64,
    pub d: usize,
    pub n0: u64,
    pub delta: f64,
    /// Distance of the starting iterate to `theta_star`.
    pub theta_init_dist: f64,
}

impl BoundParams {
    /// `mu c / 4`, which must lie in `(2/3, 1)`.
    pub fn rate_exponent(&self) -> f64 {
        self.mu * self.c / 4.0
    }

    pub fn check(&self) -> Result<()> {
        let r = self.rate_exponent();
        if !(self.mu > 0.0 && self.c > 0.0) {
            return Err(Error::Contract(format!(
                "bounds need mu > 0 and c > 0 (mu = {}, c = {})",
                self.mu, self.c
            )));
        }
        if !(r > 2.0 / 3.0 && r < 1.0) {
            return Err(Error::Contract(format!(
                "step constant violates mu*c/4 in (2/3, 1): mu = {}, c = {}, mu*c/4 = {r}",
                self.mu, self.c
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Contract(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        Ok(())
    }
}

/// `h(k) = 2 [1 + 2 (||theta_0 - theta*|| + ln k)^2]`
pub fn h_of(k: f64, p: &BoundParams) -> f64 {
    let t = p.theta_init_dist + k.ln();
    2.0 * (1.0 + 2.0 * t * t)
}

/// `beta_n = max(128 d ln n ln(n^2/delta), (2 ln(n^2/delta))^2)`
///
/// Takes a real `n` because the bound evaluates it at `n + c`.
pub fn beta_of(n: f64, p: &BoundParams) -> f64 {
    let l = (n * n / p.delta).ln();
    let first = 128.0 * p.d as f64 * n.ln() * l;
    let second = (2.0 * l) * (2.0 * l);
    first.max(second)
}

/// `K_{mu,c} = c^2 / [16 (1 - 2 (1 - 3 mu c / 16))]`
pub fn k_mu_c(p: &BoundParams) -> Result<f64> {
    p.check()?;
    Ok(p.c * p.c / (16.0 * (1.0 - 2.0 * (1.0 - 3.0 * p.mu * p.c / 16.0))))
}

/// Expectation-bound constant:
/// `K1(n) = dist ln(n0) / (n + c)^{mu c/4} + sqrt(h(n)) + (sqrt 2 + sqrt(mu beta_{n+c})) / mu`.
///
/// `ln(n0)` is taken literally, so `n0 = 1` zeroes the initial-error term.
pub fn k1_of(n: u64, p: &BoundParams) -> Result<f64> {
    p.check()?;
    if n <= p.n0 {
        return Err(Error::Contract(format!("bounds need n > n0 (n = {n}, n0 = {})", p.n0)));
    }
    let nc = n as f64 + p.c;
    let init = p.theta_init_dist * (p.n0.max(1) as f64).ln() / nc.powf(p.rate_exponent());
    let sampling = h_of(n as f64, p).sqrt();
    let drift = (2f64.sqrt() + (p.mu * beta_of(nc, p)).sqrt()) / p.mu;
    Ok(init + sampling + drift)
}

/// High-probability constant `K2(n) = sqrt(2 K_{mu,c} ln(1/delta)) + K1(n)`.
pub fn k2_of(n: u64, p: &BoundParams) -> Result<f64> {
    let spread = (2.0 * k_mu_c(p)? * (1.0 / p.delta).ln()).sqrt();
    Ok(spread + k1_of(n, p)?)
}

/// `E ||theta_n - theta_hat_n|| <= K1(n) / sqrt(n + c)`
pub fn expectation_bound(n: u64, p: &BoundParams) -> Result<f64> {
    Ok(k1_of(n, p)? / (n as f64 + p.c).sqrt())
}

/// With probability `1 - delta`, `||theta_n - theta_hat_n|| <= K2(n) / sqrt(n + c)`.
pub fn high_prob_bound(n: u64, p: &BoundParams) -> Result<f64> {
    Ok(k2_of(n, p)? / (n as f64 + p.c).sqrt())
}

/// fPEGE-GD regret bound `C K1(n)^2 d^{-1} (||theta*|| + 1/||theta*||) sqrt(n)`.
pub fn pege_bound(n: u64, p: &BoundParams, norm_theta: f64, big_c: f64) -> Result<f64> {
    if !(norm_theta > 0.0) {
        return Err(Error::Contract("regret bound undefined for theta* = 0".into()));
    }
    let k1 = k1_of(n, p)?;
    Ok(big_c * k1 * k1 / p.d as f64 * (norm_theta + 1.0 / norm_theta) * (n as f64).sqrt())
}

/// Least-squares confidence radius `sqrt(beta_n / (n mu))`.
pub fn ols_radius(n: u64, p: &BoundParams) -> f64 {
    (beta_of(n as f64, p) / (n as f64 * p.mu)).sqrt()
}
