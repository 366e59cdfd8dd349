//! Phased exploration / greedy exploitation with an exact OLS solver or an
//! fOLS-GD tracker.

use serde::{Deserialize, Serialize};

use super::{best_action, RegretLedger};
use crate::env::LinearEnv;
use crate::error::{Error, Result};
use crate::exact::OlsState;
use crate::linalg::{dist, min_eigenvalue, Matrix};
use crate::rng::{rng_for, stream};
use crate::schedule::StepSchedule;
use crate::trackers::{DataBuffer, Tracker};

/// How the step constant `c` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMode {
    /// `c = 3.2 / mu_hat` with `mu_hat = lambda_min(sum b b') / (2d)`, so `mu_hat c / 4 = 0.8`.
    Default,
    /// `c = 4d / (3 lambda_min(sum b b'))`. Violates `mu c/4 > 2/3` for the same `mu_hat`.
    Literal,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PegeStep {
    /// `gamma_n = c / (4 (c + n))`
    RateOptimal,
    /// `gamma_n = c / n`
    OverN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PegeConfig {
    pub basis: Vec<Vec<f64>>,
    pub c_mode: CMode,
    pub step: PegeStep,
    pub horizon: u64,
    pub use_tracker: bool,
    /// Keep an exact solver next to the tracker to log tracking errors.
    pub track_exact: bool,
}

impl PegeConfig {
    /// Standard basis `e_1..e_d`.
    pub fn standard(d: usize, horizon: u64, use_tracker: bool) -> Self {
        let basis = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            basis,
            c_mode: CMode::Default,
            step: PegeStep::RateOptimal,
            horizon,
            use_tracker,
            track_exact: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    /// `lambda_min(sum_i b_i b_i')`
    pub fn lambda_pege(&self) -> Result<f64> {
        let d = self.dim();
        if d == 0 || self.basis.len() != d {
            return Err(Error::InvalidConfig(format!(
                "basis needs exactly d vectors of length d (got {} vectors of length {d})",
                self.basis.len()
            )));
        }
        let mut g = Matrix::zeros(d);
        for b in &self.basis {
            if b.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: b.len() });
            }
            g.add_outer(b, 1.0);
        }
        let l = min_eigenvalue(&g)?;
        if l <= 1e-12 {
            return Err(Error::InvalidConfig(format!("basis does not span R^{d} (lambda_min = {l:e})")));
        }
        Ok(l)
    }

    pub fn mu_hat(&self) -> Result<f64> {
        Ok(self.lambda_pege()? / (2.0 * self.dim() as f64))
    }

    pub fn c(&self) -> Result<f64> {
        let l = self.lambda_pege()?;
        let d = self.dim() as f64;
        Ok(match self.c_mode {
            CMode::Default => 3.2 / (l / (2.0 * d)),
            CMode::Literal => 4.0 * d / (3.0 * l),
            CMode::Fixed(c) => c,
        })
    }

    pub fn schedule(&self) -> Result<StepSchedule> {
        let c = self.c()?;
        Ok(match self.step {
            PegeStep::RateOptimal => StepSchedule::RateOptimal { c },
            PegeStep::OverN => StepSchedule::OverN { c },
        })
    }

    /// Checks the basis and, except in literal mode, `mu_hat c / 4 in (2/3, 1)`.
    pub fn validate(&self) -> Result<()> {
        let mu = self.mu_hat()?;
        let c = self.c()?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidConfig(format!("step constant must be positive, got {c}")));
        }
        if self.c_mode != CMode::Literal {
            let r = mu * c / 4.0;
            if !(r > 2.0 / 3.0 && r < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "mu_hat * c / 4 = {r} lies outside (2/3, 1) (mu_hat = {mu}, c = {c})"
                )));
            }
        }
        self.schedule()?.validate()
    }
}

/// Estimates at the end of an exploration phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEnd {
    pub m: u64,
    /// Exploration samples so far, `m d`.
    pub n: u64,
    /// Estimate used for exploitation.
    pub theta: Vec<f64>,
    /// Exact OLS solution on the exploration samples, when it is kept.
    pub theta_hat: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PegeRun {
    pub ledger: RegretLedger,
    pub phases: Vec<PhaseEnd>,
    pub c: f64,
    pub mu_hat: f64,
    /// Exploitation phases whose greedy query saw `theta = 0`.
    pub degenerate_greedy: u64,
}

/// Runs PEGE until `cfg.horizon` pulls. Exploration plays `b_1..b_d` in order;
/// phase `m` then plays the greedy arm `m` times.
pub fn pege_run(cfg: &PegeConfig, env: &LinearEnv, seed: u64) -> Result<PegeRun> {
    cfg.validate()?;
    let d = cfg.dim();
    if env.dim() != d {
        return Err(Error::DimensionMismatch { expected: env.dim(), got: d });
    }
    if let Some(i) = cfg.basis.iter().position(|b| !env.actions().admits(b)) {
        return Err(Error::InvalidConfig(format!("basis vector {} is not in the action set", i + 1)));
    }
    let c = cfg.c()?;
    let mu_hat = cfg.mu_hat()?;
    let mut noise_rng = rng_for(seed, stream::NOISE);
    let mut draw_rng = rng_for(seed, stream::SAMPLING);

    let mut buf = DataBuffer::with_capacity(d, 0);
    let mut tracker = Tracker::new(d, cfg.schedule()?);
    let mut ols = (!cfg.use_tracker || cfg.track_exact).then(|| OlsState::new(d));
    let theta_star = env.theta_star().to_vec();
    let best = env.best_value();

    let mut run = PegeRun {
        ledger: RegretLedger::new(),
        phases: Vec::new(),
        c,
        mu_hat,
        degenerate_greedy: 0,
    };
    let mut pulls = 0u64;
    let mut m = 0u64;
    'outer: loop {
        m += 1;
        for (i, b) in cfg.basis.iter().enumerate() {
            if pulls == cfg.horizon {
                break 'outer;
            }
            let y = env.sample_reward(b, &mut noise_rng)?;
            buf.push(b, y)?;
            if cfg.use_tracker {
                tracker.fols_step(&buf, &mut draw_rng)?;
            }
            let mut err = None;
            if let Some(o) = ols.as_mut() {
                o.append_xy(b, y)?;
                if cfg.use_tracker && o.is_ready() {
                    err = Some(dist(tracker.theta(), &o.solution()?));
                }
            }
            run.ledger.record(m, Some(i as u64), b, y, &theta_star, best, err)?;
            pulls += 1;
        }
        let theta_hat = match ols.as_ref() {
            Some(o) if o.is_ready() => Some(o.solution()?),
            _ => None,
        };
        let theta = if cfg.use_tracker {
            tracker.theta().to_vec()
        } else {
            theta_hat.clone().unwrap_or_else(|| vec![0.0; d])
        };
        let greedy = best_action(&theta, env.actions())?;
        if greedy.degenerate {
            run.degenerate_greedy += 1;
        }
        run.phases.push(PhaseEnd {
            m,
            n: m * d as u64,
            theta,
            theta_hat,
        });
        for _ in 0..m {
            if pulls == cfg.horizon {
                break 'outer;
            }
            let y = env.sample_reward(&greedy.x, &mut noise_rng)?;
            run.ledger.record(m, None, &greedy.x, y, &theta_star, best, None)?;
            pulls += 1;
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ActionSet, NoiseModel};

    fn sphere_env(theta: Vec<f64>, noise: NoiseModel) -> LinearEnv {
        LinearEnv::new(theta, noise, ActionSet::UnitSphere).unwrap()
    }

    #[test]
    fn phase_structure_d2() {
        let env = sphere_env(vec![0.6, 0.8], NoiseModel::Uniform);
        let cfg = PegeConfig::standard(2, 7, true);
        let run = pege_run(&cfg, &env, 1).unwrap();
        let ids: Vec<Option<u64>> = run.ledger.entries().iter().map(|e| e.arm_id).collect();
        assert_eq!(ids, vec![Some(0), Some(1), None, Some(0), Some(1), None, None]);
        let phases: Vec<u64> = run.ledger.entries().iter().map(|e| e.phase).collect();
        assert_eq!(phases, vec![1, 1, 1, 2, 2, 2, 2]);
        let e = run.ledger.entries();
        assert_eq!(e[5].action, e[6].action);
    }

    #[test]
    fn exact_zero_noise_exploits_perfectly() {
        let env = sphere_env(vec![0.6, -0.8], NoiseModel::Zero);
        let cfg = PegeConfig::standard(2, 200, false);
        let run = pege_run(&cfg, &env, 3).unwrap();
        for e in run.ledger.entries().iter().filter(|e| e.arm_id.is_none()) {
            assert!(e.inst_regret < 1e-12);
        }
        assert!(run.ledger.prefix_sum_drift() < 1e-12);
    }

    #[test]
    fn default_c_meets_condition() {
        let cfg = PegeConfig::standard(4, 10, true);
        let r = cfg.mu_hat().unwrap() * cfg.c().unwrap() / 4.0;
        assert!((r - 0.8).abs() < 1e-12);
        let lit = PegeConfig { c_mode: CMode::Literal, ..cfg.clone() };
        assert!((lit.c().unwrap() - 16.0 / 3.0).abs() < 1e-12);
        assert!(lit.validate().is_ok());
        let bad = PegeConfig { c_mode: CMode::Fixed(1.0), ..cfg };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn basis_must_be_admitted() {
        let env = sphere_env(vec![1.0, 0.0], NoiseModel::Zero);
        let mut cfg = PegeConfig::standard(2, 10, true);
        cfg.basis[1] = vec![0.0, 0.5];
        assert!(matches!(pege_run(&cfg, &env, 0), Err(Error::InvalidConfig(_))));
        cfg.basis[1] = vec![1.0, 0.0];
        assert!(matches!(pege_run(&cfg, &env, 0), Err(Error::InvalidConfig(_))));
    }
}
