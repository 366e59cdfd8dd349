//! `track`: one tracker chasing its exact least-squares target.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use driftls::env::{random_unit_vector, NoiseModel};
use driftls::exact::{OlsState, RlsState};
use driftls::linalg::{dist, min_eigenvalue};
use driftls::metrics::{mean, quantile, slope_fit, TrackingRecord};
use driftls::rng::{rng_for, stream};
use driftls::schedule::{RegSchedule, StepSchedule};
use driftls::trackers::{DataBuffer, PhiState, SagState, SvrgState, Tracker};
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_f64, log_checkpoints, run_seeds, write_json, Table};
use crate::schedules::{reg_schedule, step_schedule, REG_KEYS, STEP_KEYS};
use crate::streams::{Stream, StreamKind};
use crate::Outcome;

pub const TRACK_SCHEMA: &str = "driftls.track.v1";

const KEYS: &[&str] = &[
    "algo",
    "stream",
    "d",
    "horizon",
    "noise",
    "theta_norm",
    "frozen",
    "per_decade",
    "fit_from",
    "fit_to",
    "average_from",
    "timing",
    "mu",
    "n0",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Fols,
    Frls,
    Svrg,
    Sag,
    Phi,
}

impl FromStr for Algo {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fols" => Algo::Fols,
            "frls" => Algo::Frls,
            "svrg" => Algo::Svrg,
            "sag" => Algo::Sag,
            "phi" => Algo::Phi,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown tracker '{s}' (expected fols|frls|svrg|sag|phi)"
                )))
            }
        })
    }
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Fols => "fols",
            Algo::Frls => "frls",
            Algo::Svrg => "svrg",
            Algo::Sag => "sag",
            Algo::Phi => "phi",
        }
    }

    fn uses_ols(self) -> bool {
        matches!(self, Algo::Fols | Algo::Phi)
    }
}

#[derive(Debug, Clone)]
pub struct TrackSettings {
    pub algo: Algo,
    pub stream: StreamKind,
    pub d: usize,
    pub horizon: u64,
    pub noise: NoiseModel,
    pub theta_norm: f64,
    pub step: StepSchedule,
    pub reg: RegSchedule,
    /// Size of a frozen buffer; 0 means one new sample per step.
    pub frozen: usize,
    pub checkpoints: Vec<u64>,
    pub average_from: Option<u64>,
    pub timing: bool,
    pub mu: f64,
    /// Step at which `||theta_n - theta*||` is recorded as the initial distance.
    pub n0: u64,
}

impl TrackSettings {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let algo: Algo = cfg.str("algo", "fols").parse()?;
        let d: usize = cfg.get("d", 5)?;
        if d == 0 {
            return Err(CliError::Config("d must be >= 1".into()));
        }
        let mu: f64 = cfg.get("mu", 1.0 / (2.0 * d as f64))?;
        if !(mu > 0.0) {
            return Err(CliError::Config(format!("mu must be positive, got {mu}")));
        }
        let (default_step, default_reg) = match algo {
            // mu c / 4 = 0.8
            Algo::Fols => (StepSchedule::RateOptimal { c: 3.2 / mu }, RegSchedule::Zero),
            Algo::Frls => (StepSchedule::Generic { c: 1.0, c1: 100.0 }, RegSchedule::Power { alpha: 0.6 }),
            Algo::Svrg => (StepSchedule::Constant { gamma0: 0.0005 }, RegSchedule::InverseN),
            Algo::Sag => (StepSchedule::Constant { gamma0: 0.005 }, RegSchedule::InverseN),
            Algo::Phi => (StepSchedule::Generic { c: 10.0, c1: 100.0 }, RegSchedule::Zero),
        };
        let horizon: u64 = cfg.get("horizon", 100_000)?;
        let per_decade: u32 = cfg.get("per_decade", 10)?;
        if per_decade == 0 {
            return Err(CliError::Config("per_decade must be >= 1".into()));
        }
        Ok(Self {
            algo,
            stream: cfg.str("stream", "cyclic").parse()?,
            d,
            horizon,
            noise: cfg.str("noise", "uniform").parse()?,
            theta_norm: cfg.get("theta_norm", 1.0)?,
            step: step_schedule(cfg, default_step)?,
            reg: reg_schedule(cfg, default_reg)?,
            frozen: cfg.get("frozen", 0)?,
            checkpoints: log_checkpoints(horizon, per_decade),
            average_from: cfg.opt("average_from")?,
            timing: cfg.get("timing", false)?,
            mu,
            n0: cfg.get("n0", d as u64)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrackRun {
    pub seed: u64,
    pub records: Vec<TrackingRecord>,
    /// First `n` with `lambda_min(A_bar_n) >= mu/2` (growing streams only).
    pub n0_observed: Option<u64>,
    /// `||theta_{n0} - theta*||` on growing streams.
    pub init_dist: Option<f64>,
}

enum State {
    Sgd(Tracker),
    Svrg(SvrgState),
    Sag(SagState),
    Phi(PhiState),
}

impl State {
    fn iterate(&self) -> &[f64] {
        match self {
            State::Sgd(t) => t.estimate(),
            State::Svrg(s) => s.theta(),
            State::Sag(s) => s.theta(),
            State::Phi(p) => p.phi(),
        }
    }
}

enum Exact {
    Ols(OlsState),
    Rls(RlsState),
}

impl Exact {
    fn append(&mut self, x: &[f64], y: f64) -> Result<()> {
        match self {
            Exact::Ols(o) => o.append_xy(x, y)?,
            Exact::Rls(r) => r.append_xy(x, y)?,
        }
        Ok(())
    }

    fn a_sum(&self) -> &driftls::linalg::Matrix {
        match self {
            Exact::Ols(o) => o.equations().a_sum(),
            Exact::Rls(r) => r.equations().a_sum(),
        }
    }

    /// Target of the tracker, or `None` while it is undefined.
    fn target(&self, query: &[f64], algo: Algo) -> Result<Option<Vec<f64>>> {
        use driftls::Error as E;
        match self {
            Exact::Ols(o) => {
                if !o.is_ready() {
                    return Ok(None);
                }
                if algo == Algo::Phi {
                    Ok(o.inverse().map(|inv| inv.mul_vec(query)))
                } else {
                    Ok(Some(o.solution()?))
                }
            }
            Exact::Rls(r) => match r.solution() {
                Ok(t) => Ok(Some(t)),
                Err(E::NotSpd | E::NotReady(_)) => Ok(None),
                Err(e) => Err(e.into()),
            },
        }
    }
}

pub fn run_seed(s: &TrackSettings, seed: u64) -> Result<TrackRun> {
    let d = s.d;
    let mut stream = Stream::new(s.stream, d, s.noise, s.theta_norm, seed)?;
    let mut draw_rng = rng_for(seed, stream::SAMPLING);
    let query = random_unit_vector(d, &mut rng_for(seed, stream::PHI));
    let mut buf = DataBuffer::with_capacity(d, if s.frozen > 0 { s.frozen } else { s.horizon as usize });
    let mut exact = if s.algo.uses_ols() {
        Exact::Ols(OlsState::new(d))
    } else {
        Exact::Rls(RlsState::new(d, s.reg))
    };
    let mut state = match s.algo {
        Algo::Fols => State::Sgd(averaged(Tracker::new(d, s.step), s.average_from)),
        Algo::Frls => State::Sgd(averaged(Tracker::new(d, s.step).with_reg(s.reg), s.average_from)),
        Algo::Svrg => State::Svrg(SvrgState::new(d)),
        Algo::Sag => State::Sag(SagState::new(d)),
        Algo::Phi => State::Phi(PhiState::new(query.clone())),
    };
    let mut run = TrackRun {
        seed,
        records: Vec::with_capacity(s.checkpoints.len()),
        n0_observed: None,
        init_dist: None,
    };
    let mut frozen_target = None;
    if s.frozen > 0 {
        for _ in 0..s.frozen {
            let (x, y) = stream.next_sample();
            buf.push(&x, y)?;
            exact.append(&x, y)?;
        }
        frozen_target = exact.target(&query, s.algo)?;
    }
    let mut next_cp = 0;
    let mut elapsed_ns: u128 = 0;
    for n in 1..=s.horizon {
        if s.frozen == 0 {
            let (x, y) = stream.next_sample();
            buf.push(&x, y)?;
            exact.append(&x, y)?;
        }
        let started = s.timing.then(Instant::now);
        let lambda = s.reg.lambda(buf.len());
        let gamma = s.step.gamma(n);
        match &mut state {
            State::Sgd(t) if s.algo == Algo::Fols => t.fols_step(&buf, &mut draw_rng)?,
            State::Sgd(t) => t.frls_step(&buf, &mut draw_rng)?,
            State::Svrg(sv) => sv.svrg_step(&buf, lambda, gamma, &mut draw_rng)?,
            State::Sag(sg) => sg.sag_step(&buf, lambda, gamma, &mut draw_rng)?,
            State::Phi(p) => p.phi_step(&buf, gamma, &mut draw_rng)?,
        }
        if let Some(t0) = started {
            elapsed_ns += t0.elapsed().as_nanos();
        }
        if s.frozen == 0 && n == s.n0 {
            run.init_dist = Some(dist(state.iterate(), stream.theta_star()));
        }
        let at_cp = next_cp < s.checkpoints.len() && s.checkpoints[next_cp] == n;
        if s.frozen == 0 && run.n0_observed.is_none() && (n <= 1000 || at_cp) {
            let a_bar = exact.a_sum().scaled(1.0 / n as f64);
            if min_eigenvalue(&a_bar)? >= s.mu / 2.0 {
                run.n0_observed = Some(n);
            }
        }
        if at_cp {
            next_cp += 1;
            let target = match &frozen_target {
                Some(t) => Some(t.clone()),
                None if s.frozen > 0 => None,
                None => exact.target(&query, s.algo)?,
            };
            if let Some(t) = target {
                run.records.push(TrackingRecord {
                    n,
                    err: dist(state.iterate(), &t),
                    wall_ns: elapsed_ns as u64,
                });
            }
        }
    }
    Ok(run)
}

fn averaged(t: Tracker, from: Option<u64>) -> Tracker {
    match from {
        Some(b) => t.with_averaging(b),
        None => t,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckpointStat {
    pub n: u64,
    pub runs: usize,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackSummary {
    pub schema: &'static str,
    pub algo: Algo,
    pub seeds: Vec<u64>,
    pub config: BTreeMap<String, String>,
    pub checkpoints: Vec<CheckpointStat>,
    pub fit_range: [u64; 2],
    /// Log-log slope of the mean error over `fit_range`.
    pub slope: Option<f64>,
    pub n0_observed: Vec<Option<u64>>,
}

/// Mean/median/q90 of the error at each checkpoint, over runs that logged it.
pub fn checkpoint_stats(runs: &[TrackRun]) -> Vec<CheckpointStat> {
    let mut by_n: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in runs {
        for rec in &r.records {
            by_n.entry(rec.n).or_default().push(rec.err);
        }
    }
    by_n.into_iter()
        .map(|(n, errs)| CheckpointStat {
            n,
            runs: errs.len(),
            mean: mean(&errs),
            median: quantile(&errs, 0.5),
            q90: quantile(&errs, 0.9),
        })
        .collect()
}

pub fn fit_slope(stats: &[CheckpointStat], from: u64, to: u64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = stats
        .iter()
        .filter(|c| c.n >= from && c.n <= to && c.mean > 0.0)
        .map(|c| (c.n as f64, c.mean))
        .collect();
    slope_fit(&pts).ok()
}

pub fn run_table(run: &TrackRun) -> Table {
    let mut t = Table::new(TRACK_SCHEMA, &["n", "err", "wall_ns"]);
    for r in &run.records {
        t.push(vec![r.n.to_string(), fmt_f64(r.err), r.wall_ns.to_string()]);
    }
    t
}

pub fn run_track(cfg: &Config) -> Result<Outcome> {
    let mut keys = KEYS.to_vec();
    keys.extend_from_slice(STEP_KEYS);
    keys.extend_from_slice(REG_KEYS);
    cfg.check_keys(&keys)?;
    let settings = TrackSettings::from_config(cfg)?;
    let seeds = cfg.seeds()?;
    let out = ensure_dir(&PathBuf::from(cfg.str("out", "out")))?;
    let fit_from: u64 = cfg.get("fit_from", 1000)?;
    let fit_to: u64 = cfg.get("fit_to", settings.horizon)?;
    let runs = run_seeds(&seeds, |seed| run_seed(&settings, seed))?;
    let name = settings.algo.name();
    for r in &runs {
        run_table(r).write(&out.join(format!("track_{name}_seed{}.csv", r.seed)))?;
    }
    let stats = checkpoint_stats(&runs);
    let slope = fit_slope(&stats, fit_from, fit_to);
    let summary = TrackSummary {
        schema: TRACK_SCHEMA,
        algo: settings.algo,
        seeds,
        config: cfg.resolved(),
        checkpoints: stats.clone(),
        fit_range: [fit_from, fit_to],
        slope,
        n0_observed: runs.iter().map(|r| r.n0_observed).collect(),
    };
    write_json(&out.join(format!("track_{name}_summary.json")), &summary)?;
    let mut table = Table::new("driftls.track_summary.v1", &["n", "runs", "mean", "median", "q90"]);
    for c in &stats {
        table.push(vec![
            c.n.to_string(),
            c.runs.to_string(),
            fmt_f64(c.mean),
            fmt_f64(c.median),
            fmt_f64(c.q90),
        ]);
    }
    let message = match (stats.last(), slope) {
        (Some(last), Some(sl)) => format!(
            "{name}: {} seeds, mean error {:.3e} at n={}, slope {sl:.3} over [{fit_from}, {fit_to}]",
            runs.len(),
            last.mean,
            last.n
        ),
        (Some(last), None) => format!("{name}: {} seeds, mean error {:.3e} at n={}", runs.len(), last.mean, last.n),
        (None, _) => format!("{name}: no checkpoints recorded"),
    };
    Ok(Outcome { message, table })
}
