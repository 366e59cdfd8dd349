//! Linear bandit policies (PEGE and LinUCB) in exact and SGD-tracker variants.
//!
//! Rewards are maximized: `x* = argmax_x x'theta*` and regret is
//! `sum_n (x* - x_n)'theta* >= 0`.

mod ledger;
mod linucb;
mod pege;

pub use ledger::{LedgerEntry, RegretLedger, REGRET_TOL};
pub use linucb::{
    replay_linucb, run_linucb_sim, Choice, LinUcbConfig, LinUcbPolicy, LinUcbRun, LinUcbSim, ReplayOutcome, Variant,
};
pub use pege::{pege_run, CMode, PegeConfig, PegeRun, PegeStep, PhaseEnd};

use crate::env::ActionSet;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, norm2};

/// Result of a best-action query.
#[derive(Debug, Clone, PartialEq)]
pub struct BestAction {
    pub x: Vec<f64>,
    /// Set when `theta = 0`, in which case `x` is the first basis direction.
    pub degenerate: bool,
}

/// `G(theta) = argmax_{x in D} theta'x`.
///
/// Finite sets break ties toward the lowest index.
pub fn best_action(theta: &[f64], set: &ActionSet) -> Result<BestAction> {
    if !all_finite(theta) {
        return Err(Error::Contract("best_action needs a finite theta".into()));
    }
    if theta.is_empty() {
        return Err(Error::Contract("best_action needs d >= 1".into()));
    }
    let zero = theta.iter().all(|t| *t == 0.0);
    let x = match set {
        ActionSet::UnitSphere | ActionSet::UnitBall => {
            if zero {
                first_basis(theta.len())
            } else {
                let n = norm2(theta);
                theta.iter().map(|t| t / n).collect()
            }
        }
        ActionSet::Ellipsoid { q, q_inv } => {
            if zero {
                // e_1 scaled onto the boundary x'Qx = 1.
                let mut e = first_basis(theta.len());
                e[0] = 1.0 / q[(0, 0)].sqrt();
                e
            } else {
                // Maximizer of theta'x on x'Qx <= 1 is Q^{-1}theta / sqrt(theta'Q^{-1}theta).
                let w = q_inv.mul_vec(theta);
                let s = dot(theta, &w).sqrt();
                w.into_iter().map(|v| v / s).collect()
            }
        }
        ActionSet::Finite(arms) => {
            let mut best = 0;
            let mut best_v = dot(&arms[0], theta);
            for (i, a) in arms.iter().enumerate().skip(1) {
                let v = dot(a, theta);
                if v > best_v {
                    best = i;
                    best_v = v;
                }
            }
            arms[best].clone()
        }
    };
    Ok(BestAction { x, degenerate: zero })
}

fn first_basis(d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[0] = 1.0;
    e
}

/// `theta'x + kappa sqrt(max(0, conf))`
pub fn ucb_value(theta: &[f64], conf: f64, x: &[f64], kappa: f64) -> f64 {
    dot(theta, x) + kappa * conf.max(0.0).sqrt()
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if *v <= values[b] => {}
            _ => best = Some(i),
        }
    }
    best
}
