//! LinUCB with exact RLS or SGD-tracked parameters and confidence widths.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_lowest, ucb_value, RegretLedger};
use crate::env::{random_unit_vector, Arm, ArmGenerator, ArmSetSpec, EventRecord, NoiseModel};
use crate::error::{check_dim, Error, Result};
use crate::exact::{RlsState, RlsSystem};
use crate::linalg::{dist, dot, norm2};
use crate::metrics::{ctr_score, TrackingRecord};
use crate::rng::{rng_for, stream};
use crate::schedule::{RegSchedule, StepSchedule};
use crate::trackers::{DataBuffer, Iterate, PhiState, SagState, SvrgState, Tracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Exact,
    Gd,
    Svrg,
    Sag,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Variant::Exact),
            "gd" => Ok(Variant::Gd),
            "svrg" => Ok(Variant::Svrg),
            "sag" => Ok(Variant::Sag),
            _ => Err(Error::InvalidConfig(format!(
                "unknown LinUCB variant '{s}' (expected exact|gd|svrg|sag)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinUcbConfig {
    pub kappa: f64,
    /// Largest arm set accepted per round.
    pub k_max: usize,
    /// Confidence-tracker steps per arm per round.
    pub t_steps: usize,
    pub variant: Variant,
    /// Step size of the parameter tracker.
    pub step: StepSchedule,
    pub reg: RegSchedule,
    /// Step size of the per-arm confidence trackers.
    pub phi_step: StepSchedule,
    /// Solve the exact RLS problem each round to report tracking error.
    pub track_error: bool,
}

impl LinUcbConfig {
    /// Default regularisation and step sizes per variant.
    /// `kappa` has no default and must be supplied.
    pub fn standard(variant: Variant, kappa: f64, k_max: usize) -> Self {
        let (reg, step) = match variant {
            Variant::Exact | Variant::Gd => (RegSchedule::Power { alpha: 0.6 }, StepSchedule::Generic { c: 1.0, c1: 100.0 }),
            Variant::Svrg => (RegSchedule::InverseN, StepSchedule::Constant { gamma0: 0.0005 }),
            Variant::Sag => (RegSchedule::InverseN, StepSchedule::Constant { gamma0: 0.005 }),
        };
        Self {
            kappa,
            k_max,
            t_steps: 1,
            variant,
            step,
            reg,
            phi_step: StepSchedule::Generic { c: 1.0, c1: 100.0 },
            track_error: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidConfig(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.k_max == 0 || self.t_steps == 0 {
            return Err(Error::InvalidConfig("LinUCB needs K >= 1 and T >= 1".into()));
        }
        self.step.validate()?;
        self.phi_step.validate()?;
        self.reg.validate()
    }
}

#[derive(Debug, Clone)]
enum Param {
    Exact,
    Gd(Tracker),
    Svrg(SvrgState),
    Sag(SagState),
}

/// Outcome of the selection half of a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Choice {
    pub index: usize,
    pub ucbs: Vec<f64>,
    /// `||theta_n - theta_tilde_n||` on the pre-round buffer, when requested.
    pub tracking_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct LinUcbPolicy {
    cfg: LinUcbConfig,
    buf: DataBuffer,
    rls: RlsState,
    param: Param,
    theta: Vec<f64>,
    phis: BTreeMap<u64, PhiState>,
    rounds: u64,
    clamped: u64,
}

impl LinUcbPolicy {
    pub fn new(cfg: LinUcbConfig, d: usize) -> Result<Self> {
        cfg.validate()?;
        if d == 0 {
            return Err(Error::InvalidConfig("LinUCB needs d >= 1".into()));
        }
        let param = match cfg.variant {
            Variant::Exact => Param::Exact,
            Variant::Gd => Param::Gd(Tracker::new(d, cfg.step).with_reg(cfg.reg)),
            Variant::Svrg => Param::Svrg(SvrgState::new(d)),
            Variant::Sag => Param::Sag(SagState::new(d)),
        };
        Ok(Self {
            cfg,
            buf: DataBuffer::new(d),
            rls: RlsState::new(d, cfg.reg),
            param,
            theta: vec![0.0; d],
            phis: BTreeMap::new(),
            rounds: 0,
            clamped: 0,
        })
    }

    pub fn config(&self) -> &LinUcbConfig {
        &self.cfg
    }

    pub fn buffer(&self) -> &DataBuffer {
        &self.buf
    }

    /// Parameter estimate used in the most recent selection.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// Number of confidence values that were negative and clamped to 0.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    pub fn phi(&self, arm_id: u64) -> Option<&PhiState> {
        self.phis.get(&arm_id)
    }

    fn exact_system(&self) -> Result<Option<RlsSystem>> {
        if self.buf.is_empty() {
            Ok(None)
        } else {
            self.rls.factor().map(Some)
        }
    }

    /// Advances the parameter tracker, refreshes every arm's confidence and
    /// returns the arm with the largest UCB. Reads no rewards.
    pub fn select<R: Rng + ?Sized>(&mut self, arms: &[Arm], rng: &mut R) -> Result<Choice> {
        if arms.is_empty() {
            return Err(Error::Contract("linucb_step needs at least one arm".into()));
        }
        if arms.len() > self.cfg.k_max {
            return Err(Error::Contract(format!(
                "round offers {} arms but K = {}",
                arms.len(),
                self.cfg.k_max
            )));
        }
        for a in arms {
            check_dim(self.buf.dim(), a.x.len())?;
        }
        self.rounds += 1;
        let lambda = self.cfg.reg.lambda(self.buf.len());
        let have_data = !self.buf.is_empty();
        if have_data {
            match &mut self.param {
                Param::Exact => {}
                Param::Gd(t) => t.frls_step(&self.buf, rng)?,
                Param::Svrg(s) => {
                    let gamma = self.cfg.step.gamma(s.steps() + 1);
                    s.svrg_step(&self.buf, lambda, gamma, rng)?;
                }
                Param::Sag(s) => {
                    let gamma = self.cfg.step.gamma(s.steps() + 1);
                    s.sag_step(&self.buf, lambda, gamma, rng)?;
                }
            }
        }
        let need_exact = self.cfg.variant == Variant::Exact || self.cfg.track_error;
        let system = if need_exact { self.exact_system()? } else { None };
        let mut tracking_error = None;
        match (&self.param, &system) {
            (Param::Exact, Some(sys)) => self.theta = sys.solution(),
            (Param::Exact, None) => self.theta.iter_mut().for_each(|t| *t = 0.0),
            (Param::Gd(t), _) => self.theta.copy_from_slice(t.theta()),
            (Param::Svrg(s), _) => self.theta.copy_from_slice(s.theta()),
            (Param::Sag(s), _) => self.theta.copy_from_slice(s.theta()),
        }
        if self.cfg.variant != Variant::Exact {
            if let Some(sys) = &system {
                tracking_error = Some(dist(&self.theta, &sys.solution()));
            }
        }

        let mut ucbs = Vec::with_capacity(arms.len());
        for a in arms {
            let conf = if self.cfg.variant == Variant::Exact {
                match &system {
                    Some(sys) => sys.confidence(&a.x),
                    // Empty buffer: confidence of the identity design, ||x||^2.
                    None => dot(&a.x, &a.x),
                }
            } else {
                let phi = self
                    .phis
                    .entry(a.id)
                    .or_insert_with(|| PhiState::new(a.x.clone()));
                phi.retarget(&a.x)?;
                if have_data {
                    for _ in 0..self.cfg.t_steps {
                        let gamma = self.cfg.phi_step.gamma(phi.steps() + 1);
                        phi.phi_step(&self.buf, gamma, rng)?;
                    }
                }
                phi.confidence()
            };
            if conf < 0.0 {
                self.clamped += 1;
            }
            ucbs.push(ucb_value(&self.theta, conf, &a.x, self.cfg.kappa));
        }
        let index = argmax_lowest(&ucbs).expect("arm set is non-empty");
        Ok(Choice {
            index,
            ucbs,
            tracking_error,
        })
    }

    /// Adds the observed `(x, y)` to the shared buffer.
    pub fn observe(&mut self, x: &[f64], y: f64) -> Result<()> {
        self.buf.push(x, y)?;
        self.rls.append_xy(x, y)
    }

    /// One full round: select, query `reward` for the chosen index only, observe.
    pub fn step<R, F>(&mut self, arms: &[Arm], reward: F, rng: &mut R) -> Result<(Choice, f64)>
    where
        R: Rng + ?Sized,
        F: FnOnce(usize) -> Result<f64>,
    {
        let choice = self.select(arms, rng)?;
        let y = reward(choice.index)?;
        self.observe(&arms[choice.index].x, y)?;
        Ok((choice, y))
    }
}

/// Simulated LinUCB environment with per-round arm sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinUcbSim {
    pub d: usize,
    pub k: usize,
    pub horizon: u64,
    pub density: f64,
    pub fixed_pool: bool,
    pub noise: NoiseModel,
    pub theta_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LinUcbRun {
    pub ledger: RegretLedger,
    pub tracking: Vec<TrackingRecord>,
    pub theta_star: Vec<f64>,
    pub clamped: u64,
    /// Largest absolute parameter coordinate seen; finite iff no divergence.
    pub max_abs_theta: f64,
}

pub fn run_linucb_sim(cfg: &LinUcbConfig, sim: &LinUcbSim, seed: u64) -> Result<LinUcbRun> {
    sim.noise.validate()?;
    let spec = ArmSetSpec {
        d: sim.d,
        k: sim.k,
        density: sim.density,
        fixed_pool: sim.fixed_pool,
    };
    let mut arms_gen = ArmGenerator::new(spec)?;
    let theta_star: Vec<f64> = random_unit_vector(sim.d, &mut rng_for(seed, stream::PROBLEM))
        .into_iter()
        .map(|v| v * sim.theta_norm)
        .collect();
    let mut arm_rng = rng_for(seed, stream::ARMS);
    let mut noise_rng = rng_for(seed, stream::NOISE);
    let mut draw_rng = rng_for(seed, stream::SAMPLING);
    let mut policy = LinUcbPolicy::new(*cfg, sim.d)?;
    let mut run = LinUcbRun {
        ledger: RegretLedger::new(),
        tracking: Vec::new(),
        theta_star: theta_star.clone(),
        clamped: 0,
        max_abs_theta: 0.0,
    };
    for round in 1..=sim.horizon {
        let arms = arms_gen.next_round(&mut arm_rng);
        let (choice, y) = policy.step(
            &arms,
            |i| Ok(dot(&arms[i].x, &theta_star) + sim.noise.sample(&mut noise_rng)),
            &mut draw_rng,
        )?;
        let best = arms
            .iter()
            .map(|a| dot(&a.x, &theta_star))
            .fold(f64::NEG_INFINITY, f64::max);
        let chosen = &arms[choice.index];
        run.ledger
            .record(round, Some(chosen.id), &chosen.x, y, &theta_star, best, choice.tracking_error)?;
        if let Some(err) = choice.tracking_error {
            run.tracking.push(TrackingRecord { n: round, err, wall_ns: 0 });
        }
        run.max_abs_theta = policy
            .theta()
            .iter()
            .fold(run.max_abs_theta, |m, t| m.max(t.abs()));
    }
    run.clamped = policy.clamped();
    Ok(run)
}

/// Rejection-sampling replay of a uniformly logged event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub records: u64,
    pub matched: u64,
    /// Records without a logged choice and reward.
    pub skipped: u64,
    pub clicks: f64,
    pub ctr: Option<f64>,
    /// `sqrt(sum theta^2)` of the final estimate.
    pub theta_norm: f64,
}

pub fn replay_linucb<I>(cfg: &LinUcbConfig, d: usize, records: I, seed: u64) -> Result<ReplayOutcome>
where
    I: IntoIterator<Item = Result<EventRecord>>,
{
    let mut policy = LinUcbPolicy::new(*cfg, d)?;
    let mut rng = rng_for(seed, stream::SAMPLING);
    let mut rewards = Vec::new();
    let mut out = ReplayOutcome {
        records: 0,
        matched: 0,
        skipped: 0,
        clicks: 0.0,
        ctr: None,
        theta_norm: 0.0,
    };
    for rec in records {
        let rec = rec?;
        out.records += 1;
        let (Some(chosen), Some(reward)) = (rec.chosen, rec.reward) else {
            out.skipped += 1;
            continue;
        };
        let choice = policy.select(&rec.arms, &mut rng)?;
        let arm = &rec.arms[choice.index];
        if arm.id == chosen {
            policy.observe(&arm.x, reward)?;
            rewards.push(reward);
        }
    }
    out.matched = rewards.len() as u64;
    out.clicks = rewards.iter().sum();
    if !rewards.is_empty() {
        out.ctr = Some(ctr_score(&rewards)?);
    }
    out.theta_norm = norm2(policy.theta());
    Ok(out)
}
