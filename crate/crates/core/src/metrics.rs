//! Measurement layer: tracking error, regret, rate fitting and CTR.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, dot};

/// One tracking-error observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingRecord {
    pub n: u64,
    /// `||theta_n - target_n||_2`
    pub err: f64,
    pub wall_ns: u64,
}

/// Receiver for streamed tracking records.
pub trait TraceSink {
    fn emit(&mut self, rec: TrackingRecord);
}

impl TraceSink for Vec<TrackingRecord> {
    fn emit(&mut self, rec: TrackingRecord) {
        self.push(rec);
    }
}

pub fn tracking_error(theta: &[f64], target: &[f64]) -> Result<f64> {
    check_dim(target.len(), theta.len())?;
    Ok(dist(theta, target))
}

/// Prefix sums of `best_value - x_n' theta_star`.
pub fn cumulative_regret<'a, I>(actions: I, theta_star: &[f64], best_value: f64) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut total = 0.0;
    let mut out = Vec::new();
    for x in actions {
        check_dim(theta_star.len(), x.len())?;
        total += best_value - dot(x, theta_star);
        out.push(total);
    }
    Ok(out)
}

/// Least-squares slope of `ln(value)` against `ln(n)`.
///
/// Needs at least two distinct abscissae; every value must be positive.
pub fn slope_fit(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::Contract(format!(
            "slope fit needs at least 2 points, got {}",
            series.len()
        )));
    }
    if let Some((n, v)) = series.iter().find(|(n, v)| !(*n > 0.0 && *v > 0.0)) {
        return Err(Error::Contract(format!(
            "slope fit needs positive data, got ({n}, {v})"
        )));
    }
    let m = series.len() as f64;
    let (sx, sy) = series
        .iter()
        .fold((0.0, 0.0), |(a, b), (n, v)| (a + n.ln(), b + v.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (n, v) in series {
        let dx = n.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (v.ln() - my);
    }
    if sxx == 0.0 {
        return Err(Error::Contract("slope fit needs distinct n values".into()));
    }
    Ok(sxy / sxx)
}

/// Clicks per round, scaled by 10^4.
pub fn ctr_score(rewards: &[f64]) -> Result<f64> {
    if rewards.is_empty() {
        return Err(Error::Contract("CTR of zero rounds".into()));
    }
    let mut clicks = 0usize;
    for r in rewards {
        if *r == 1.0 {
            clicks += 1;
        } else if *r != 0.0 {
            return Err(Error::Contract(format!("CTR needs binary rewards, got {r}")));
        }
    }
    Ok(clicks as f64 / rewards.len() as f64 * 10_000.0)
}

/// Empirical quantile with linear interpolation; `q` in `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
