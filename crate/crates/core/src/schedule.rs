//! Step-size and regularisation schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step sizes `gamma_n`, indexed by the 1-based step counter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepSchedule {
    /// `c / (4 (c + n))`, the rate-optimal choice under strong convexity.
    RateOptimal { c: f64 },
    /// `c / (c1 + n)`; `c = 1, c1 = 100` is the LinUCB default.
    Generic { c: f64, c1: f64 },
    /// `c * n^{-alpha}`, meant to be combined with iterate averaging.
    Power { c: f64, alpha: f64 },
    Constant { gamma0: f64 },
    /// `c / n`, the plain fPEGE-GD step. Exceeds 1 for small
    /// `n` whenever `c > 1`.
    OverN { c: f64 },
}

impl StepSchedule {
    pub fn gamma(&self, n: u64) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            StepSchedule::RateOptimal { c } => c / (4.0 * (c + n)),
            StepSchedule::Generic { c, c1 } => c / (c1 + n),
            StepSchedule::Power { c, alpha } => c * n.powf(-alpha),
            StepSchedule::Constant { gamma0 } => gamma0,
            StepSchedule::OverN { c } => c / n,
        }
    }

    /// Checks parameters and that every `gamma_n` lies in `(0, 1)`.
    ///
    /// All kinds are non-increasing in `n`, so checking `gamma_1` suffices.
    /// `OverN` only needs `c > 0`.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepSchedule::RateOptimal { c } => c > 0.0 && c.is_finite(),
            StepSchedule::Generic { c, c1 } => c > 0.0 && c1 >= 0.0 && c.is_finite() && c1.is_finite(),
            StepSchedule::Power { c, alpha } => c > 0.0 && alpha >= 0.0 && c.is_finite(),
            StepSchedule::Constant { gamma0 } => gamma0 > 0.0 && gamma0.is_finite(),
            StepSchedule::OverN { c } => return if c > 0.0 && c.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("c/n schedule needs c > 0, got {c}")))
            },
        };
        let g1 = self.gamma(1);
        if !ok || !(g1 > 0.0 && g1 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step schedule {self:?} must give gamma_n in (0,1); gamma_1 = {g1}"
            )));
        }
        Ok(())
    }
}

/// Regularisation `lambda_n`, indexed by the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegSchedule {
    Zero,
    Constant(f64),
    /// `n^{-(1 - alpha)}`
    Power { alpha: f64 },
    /// `1 / n`
    InverseN,
}

impl RegSchedule {
    /// `lambda_n`; `n = 0` is evaluated as `n = 1`.
    pub fn lambda(&self, n: usize) -> f64 {
        let n = n.max(1) as f64;
        match *self {
            RegSchedule::Zero => 0.0,
            RegSchedule::Constant(l) => l,
            RegSchedule::Power { alpha } => n.powf(-(1.0 - alpha)),
            RegSchedule::InverseN => 1.0 / n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RegSchedule::Constant(l) if !(l >= 0.0 && l.is_finite()) => {
                Err(Error::InvalidConfig(format!("constant lambda must be >= 0, got {l}")))
            }
            RegSchedule::Power { alpha } if !(0.0..=1.0).contains(&alpha) => {
                Err(Error::InvalidConfig(format!("alpha must lie in [0,1], got {alpha}")))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_optimal_is_exact() {
        let s = StepSchedule::RateOptimal { c: 3.2 };
        for n in [1u64, 10, 1000] {
            assert_eq!(s.gamma(n), 3.2 / (4.0 * (3.2 + n as f64)));
        }
        s.validate().unwrap();
    }

    #[test]
    fn table_settings() {
        assert_eq!(StepSchedule::Generic { c: 1.0, c1: 100.0 }.gamma(900), 1.0 / 1000.0);
        assert!((RegSchedule::Power { alpha: 0.6 }.lambda(1024) - 1024f64.powf(-0.4)).abs() < 1e-15);
        assert_eq!(RegSchedule::InverseN.lambda(8), 0.125);
    }

    #[test]
    fn validation_rejects_large_steps() {
        assert!(StepSchedule::Constant { gamma0: 1.5 }.validate().is_err());
        assert!(StepSchedule::Generic { c: 5.0, c1: 1.0 }.validate().is_err());
        assert!(StepSchedule::OverN { c: 12.0 }.validate().is_ok());
        assert!(RegSchedule::Power { alpha: 1.5 }.validate().is_err());
    }
}
