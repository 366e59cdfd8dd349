use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;

/// Instantaneous regret may dip below zero by rounding only.
pub const REGRET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// 1-based pull index.
    pub n: u64,
    /// PEGE phase or LinUCB round.
    pub phase: u64,
    pub arm_id: Option<u64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub tracking_error: Option<f64>,
}

/// Per-pull record of actions, rewards and regret.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RegretLedger {
    entries: Vec<LedgerEntry>,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cumulative(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cum_regret)
    }

    /// Appends one pull. `best_value` is `max_{x in D_n} x'theta*` for this pull.
    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        phase: u64,
        arm_id: Option<u64>,
        action: &[f64],
        reward: f64,
        theta_star: &[f64],
        best_value: f64,
        tracking_error: Option<f64>,
    ) -> Result<&LedgerEntry> {
        let inst = best_value - dot(action, theta_star);
        if inst < -REGRET_TOL {
            return Err(Error::Contract(format!(
                "negative instantaneous regret {inst:e}: action beats the best action"
            )));
        }
        let entry = LedgerEntry {
            n: self.entries.len() as u64 + 1,
            phase,
            arm_id,
            action: action.to_vec(),
            reward,
            inst_regret: inst,
            cum_regret: self.cumulative() + inst,
            tracking_error,
        };
        self.entries.push(entry);
        Ok(self.entries.last().expect("just pushed"))
    }

    /// Cumulative regret series `(n, R_n)`.
    pub fn curve(&self) -> Vec<(u64, f64)> {
        self.entries.iter().map(|e| (e.n, e.cum_regret)).collect()
    }

    /// Largest gap between the stored cumulative column and a fresh prefix sum.
    pub fn prefix_sum_drift(&self) -> f64 {
        let mut total = 0.0;
        let mut worst: f64 = 0.0;
        for e in &self.entries {
            total += e.inst_regret;
            worst = worst.max((total - e.cum_regret).abs());
        }
        worst
    }
}
