//! `bandit`: PEGE / fPEGE-GD on the unit sphere and LinUCB variants on
//! simulated or logged arm streams.

use std::collections::BTreeMap;
use std::path::PathBuf;

use driftls::bandits::{
    pege_run, replay_linucb, run_linucb_sim, CMode, LinUcbConfig, LinUcbSim, PegeConfig, PegeStep, RegretLedger,
    ReplayOutcome, Variant,
};
use driftls::env::{random_unit_vector, ActionSet, EventLogReader, LinearEnv, NoiseModel};
use driftls::linalg::dist;
use driftls::metrics::{mean, quantile, slope_fit};
use driftls::rng::{rng_for, stream};
use driftls::schedule::StepSchedule;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_f64, fmt_opt, log_checkpoints, run_seeds, write_json, Table};
use crate::schedules::{reg_schedule, step_schedule, REG_KEYS, STEP_KEYS};
use crate::Outcome;

pub const BANDIT_SCHEMA: &str = "driftls.bandit.v1";
pub const REPLAY_SCHEMA: &str = "driftls.replay.v1";

const KEYS: &[&str] = &[
    "algo",
    "variant",
    "d",
    "k",
    "t",
    "horizon",
    "noise",
    "theta_norm",
    "per_decade",
    "fit_from",
    "trace",
    "c_mode",
    "pege_step",
    "track_exact",
    "kappa",
    "density",
    "fixed_pool",
    "phi_c",
    "phi_c1",
    "track_error",
    "log",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BanditAlgo {
    Pege,
    Fpege,
    Linucb,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Pege { cfg: PegeConfig, noise: NoiseModel, theta_norm: f64 },
    LinUcb { cfg: LinUcbConfig, sim: LinUcbSim },
    Replay { cfg: LinUcbConfig, log: PathBuf },
}

#[derive(Debug, Clone)]
pub struct BanditSettings {
    pub algo: BanditAlgo,
    pub problem: Problem,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub full_trace: bool,
    pub fit_from: u64,
}

impl BanditSettings {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let algo = match cfg.str("algo", "fpege").as_str() {
            "pege" => BanditAlgo::Pege,
            "fpege" => BanditAlgo::Fpege,
            "linucb" => BanditAlgo::Linucb,
            other => {
                return Err(CliError::Config(format!(
                    "unknown bandit algorithm '{other}' (expected pege|fpege|linucb)"
                )))
            }
        };
        let horizon: u64 = cfg.get("horizon", 10_000)?;
        let per_decade: u32 = cfg.get("per_decade", 10)?;
        if per_decade == 0 {
            return Err(CliError::Config("per_decade must be >= 1".into()));
        }
        let full_trace = match cfg.str("trace", "log").as_str() {
            "log" => false,
            "full" => true,
            other => return Err(CliError::Config(format!("trace must be log|full, got '{other}'"))),
        };
        let noise: NoiseModel = cfg.str("noise", "uniform").parse()?;
        let theta_norm: f64 = cfg.get("theta_norm", 1.0)?;
        if !(theta_norm > 0.0 && theta_norm.is_finite()) {
            return Err(CliError::Config(format!("theta_norm must be positive, got {theta_norm}")));
        }
        let problem = match algo {
            BanditAlgo::Pege | BanditAlgo::Fpege => {
                let d: usize = cfg.get("d", 2)?;
                if d == 0 {
                    return Err(CliError::Config("d must be >= 1".into()));
                }
                let use_tracker = algo == BanditAlgo::Fpege;
                let mut p = PegeConfig::standard(d, horizon, use_tracker);
                p.c_mode = match cfg.str("c_mode", "default").as_str() {
                    "default" => CMode::Default,
                    "literal" => CMode::Literal,
                    v => CMode::Fixed(v.parse::<f64>().map_err(|_| {
                        CliError::Config(format!("c_mode must be default|literal|<number>, got '{v}'"))
                    })?),
                };
                p.step = match cfg.str("pege_step", "rate_optimal").as_str() {
                    "rate_optimal" => PegeStep::RateOptimal,
                    "over_n" => PegeStep::OverN,
                    other => {
                        return Err(CliError::Config(format!("pege_step must be rate_optimal|over_n, got '{other}'")))
                    }
                };
                p.track_exact = cfg.get("track_exact", use_tracker)?;
                p.validate()?;
                Problem::Pege { cfg: p, noise, theta_norm }
            }
            BanditAlgo::Linucb => {
                let variant: Variant = cfg.str("variant", "gd").parse()?;
                let kappa: f64 = cfg.required("kappa")?;
                let k: usize = cfg.get("k", 5)?;
                let mut lc = LinUcbConfig::standard(variant, kappa, k);
                lc.t_steps = cfg.get("t", 1)?;
                lc.step = step_schedule(cfg, lc.step)?;
                lc.reg = reg_schedule(cfg, lc.reg)?;
                lc.phi_step = StepSchedule::Generic {
                    c: cfg.get("phi_c", 1.0)?,
                    c1: cfg.get("phi_c1", 100.0)?,
                };
                lc.track_error = cfg.get("track_error", variant != Variant::Exact)?;
                lc.validate()?;
                match cfg.opt_str("log") {
                    Some(path) => Problem::Replay { cfg: lc, log: PathBuf::from(path) },
                    None => Problem::LinUcb {
                        cfg: lc,
                        sim: LinUcbSim {
                            d: cfg.get("d", 10)?,
                            k,
                            horizon,
                            density: cfg.get("density", 1.0)?,
                            fixed_pool: cfg.get("fixed_pool", false)?,
                            noise,
                            theta_norm,
                        },
                    },
                }
            }
        };
        Ok(Self {
            algo,
            problem,
            horizon,
            checkpoints: log_checkpoints(horizon, per_decade),
            full_trace,
            fit_from: cfg.get("fit_from", 1000)?,
        })
    }
}

/// Per-seed result of a simulated bandit run.
#[derive(Debug, Clone)]
pub struct BanditRun {
    pub seed: u64,
    pub ledger: RegretLedger,
    /// Phase-end tracker errors `(md, ||theta_md - theta_hat_md||)` for fPEGE-GD.
    pub phase_errors: Vec<(u64, f64)>,
    pub clamped: u64,
    pub max_abs_theta: f64,
}

pub fn run_seed(s: &BanditSettings, seed: u64) -> Result<BanditRun> {
    match &s.problem {
        Problem::Pege { cfg, noise, theta_norm } => {
            let theta: Vec<f64> = random_unit_vector(cfg.dim(), &mut rng_for(seed, stream::PROBLEM))
                .into_iter()
                .map(|v| v * theta_norm)
                .collect();
            let env = LinearEnv::new(theta, *noise, ActionSet::UnitSphere)?;
            let run = pege_run(cfg, &env, seed)?;
            let phase_errors = run
                .phases
                .iter()
                .filter(|_| cfg.use_tracker)
                .filter_map(|p| p.theta_hat.as_ref().map(|h| (p.n, dist(&p.theta, h))))
                .collect();
            let max_abs_theta = run
                .phases
                .iter()
                .flat_map(|p| p.theta.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
            Ok(BanditRun { seed, ledger: run.ledger, phase_errors, clamped: 0, max_abs_theta })
        }
        Problem::LinUcb { cfg, sim } => {
            let run = run_linucb_sim(cfg, sim, seed)?;
            Ok(BanditRun {
                seed,
                ledger: run.ledger,
                phase_errors: Vec::new(),
                clamped: run.clamped,
                max_abs_theta: run.max_abs_theta,
            })
        }
        Problem::Replay { .. } => Err(CliError::Config("replay runs have no regret ledger".into())),
    }
}

pub fn ledger_table(s: &BanditSettings, run: &BanditRun) -> Table {
    let mut t = Table::new(
        BANDIT_SCHEMA,
        &["n", "phase", "arm_id", "reward", "inst_regret", "cum_regret", "tracking_error", "wall_ns"],
    );
    let mut cp = s.checkpoints.iter().peekable();
    for e in run.ledger.entries() {
        let keep = if s.full_trace {
            true
        } else {
            while cp.peek().is_some_and(|c| **c < e.n) {
                cp.next();
            }
            cp.peek() == Some(&&e.n)
        };
        if keep {
            t.push(vec![
                e.n.to_string(),
                e.phase.to_string(),
                e.arm_id.map(|a| a.to_string()).unwrap_or_default(),
                fmt_f64(e.reward),
                fmt_f64(e.inst_regret),
                fmt_f64(e.cum_regret),
                fmt_opt(e.tracking_error),
                "0".to_string(),
            ]);
        }
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BanditSummary {
    pub schema: &'static str,
    pub algo: BanditAlgo,
    pub seeds: Vec<u64>,
    pub config: BTreeMap<String, String>,
    pub regret: Vec<CurvePoint>,
    pub final_mean_regret: f64,
    /// Log-log slope of mean cumulative regret over `[fit_from, horizon]`.
    pub regret_exponent: Option<f64>,
    pub tracking: Vec<CurvePoint>,
    /// Largest tracking error over all seeds at rounds `n >= fit_from`.
    pub max_tracking_error_after_fit_from: Option<f64>,
    pub phase_errors: Vec<CurvePoint>,
    pub clamped_confidences: u64,
    pub all_finite: bool,
}

fn curve(samples: BTreeMap<u64, Vec<f64>>) -> Vec<CurvePoint> {
    samples
        .into_iter()
        .map(|(n, v)| CurvePoint { n, mean: mean(&v), median: quantile(&v, 0.5), q90: quantile(&v, 0.9) })
        .collect()
}

pub fn summarize(s: &BanditSettings, seeds: Vec<u64>, runs: &[BanditRun], config: BTreeMap<String, String>) -> BanditSummary {
    let mut regret: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut tracking: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut phases: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut max_track: Option<f64> = None;
    for r in runs {
        let e = r.ledger.entries();
        for &n in &s.checkpoints {
            if let Some(entry) = e.get(n as usize - 1) {
                regret.entry(n).or_default().push(entry.cum_regret);
                if let Some(te) = entry.tracking_error {
                    tracking.entry(n).or_default().push(te);
                }
            }
        }
        for entry in e.iter().filter(|x| x.n >= s.fit_from) {
            if let Some(te) = entry.tracking_error {
                max_track = Some(max_track.map_or(te, |m: f64| m.max(te)));
            }
        }
        for (n, err) in &r.phase_errors {
            phases.entry(*n).or_default().push(*err);
        }
    }
    let regret = curve(regret);
    let pts: Vec<(f64, f64)> = regret
        .iter()
        .filter(|p| p.n >= s.fit_from && p.mean > 0.0)
        .map(|p| (p.n as f64, p.mean))
        .collect();
    BanditSummary {
        schema: BANDIT_SCHEMA,
        algo: s.algo,
        seeds,
        config,
        final_mean_regret: mean(&runs.iter().map(|r| r.ledger.cumulative()).collect::<Vec<_>>()),
        regret_exponent: slope_fit(&pts).ok(),
        regret,
        tracking: curve(tracking),
        max_tracking_error_after_fit_from: max_track,
        phase_errors: curve(phases),
        clamped_confidences: runs.iter().map(|r| r.clamped).sum(),
        all_finite: runs.iter().all(|r| r.max_abs_theta.is_finite()),
    }
}

fn run_replay(cfg: &Config, lc: &LinUcbConfig, log: &std::path::Path, seeds: &[u64], out: &std::path::Path) -> Result<Outcome> {
    // dimension and arm count come from the log unless `k` is given
    let mut d = None;
    let mut k_log = 0usize;
    for rec in EventLogReader::open(log)? {
        let rec = rec?;
        d.get_or_insert(rec.arms[0].x.len());
        k_log = k_log.max(rec.arms.len());
    }
    let d = d.ok_or_else(|| CliError::Config(format!("event log {} is empty", log.display())))?;
    let mut lc = *lc;
    if !cfg.has("k") {
        lc.k_max = k_log;
    }
    let lc = &lc;
    let outcomes: Vec<ReplayOutcome> =
        run_seeds(seeds, |seed| Ok(replay_linucb(lc, d, EventLogReader::open(log)?, seed)?))?;
    let mut table = Table::new(REPLAY_SCHEMA, &["seed", "records", "matched", "clicks", "ctr"]);
    for (seed, o) in seeds.iter().zip(&outcomes) {
        table.push(vec![
            seed.to_string(),
            o.records.to_string(),
            o.matched.to_string(),
            fmt_f64(o.clicks),
            fmt_opt(o.ctr),
        ]);
    }
    table.write(&out.join("replay.csv"))?;
    #[derive(Serialize)]
    struct ReplaySummary<'a> {
        schema: &'static str,
        seeds: &'a [u64],
        config: BTreeMap<String, String>,
        d: usize,
        k_max: usize,
        runs: &'a [ReplayOutcome],
        mean_ctr: Option<f64>,
    }
    let ctrs: Vec<f64> = outcomes.iter().filter_map(|o| o.ctr).collect();
    let mean_ctr = (!ctrs.is_empty()).then(|| mean(&ctrs));
    write_json(
        &out.join("replay_summary.json"),
        &ReplaySummary { schema: REPLAY_SCHEMA, seeds, config: cfg.resolved(), d, k_max: lc.k_max, runs: &outcomes, mean_ctr },
    )?;
    let message = match mean_ctr {
        Some(c) => format!("replay: {} seeds, mean CTR score {c:.1}", seeds.len()),
        None => "replay: no matched rounds".to_string(),
    };
    Ok(Outcome { message, table })
}

pub fn run_bandit(cfg: &Config) -> Result<Outcome> {
    let mut keys = KEYS.to_vec();
    keys.extend_from_slice(STEP_KEYS);
    keys.extend_from_slice(REG_KEYS);
    cfg.check_keys(&keys)?;
    let settings = BanditSettings::from_config(cfg)?;
    let seeds = cfg.seeds()?;
    let out = ensure_dir(&PathBuf::from(cfg.str("out", "out")))?;
    if let Problem::Replay { cfg: lc, log } = &settings.problem {
        return run_replay(cfg, lc, log, &seeds, &out);
    }
    let runs = run_seeds(&seeds, |seed| run_seed(&settings, seed))?;
    let name = match settings.algo {
        BanditAlgo::Pege => "pege".to_string(),
        BanditAlgo::Fpege => "fpege".to_string(),
        BanditAlgo::Linucb => match &settings.problem {
            Problem::LinUcb { cfg, .. } => format!("linucb_{}", variant_name(cfg.variant)),
            _ => "linucb".to_string(),
        },
    };
    for r in &runs {
        ledger_table(&settings, r).write(&out.join(format!("bandit_{name}_seed{}.csv", r.seed)))?;
    }
    let summary = summarize(&settings, seeds, &runs, cfg.resolved());
    write_json(&out.join(format!("bandit_{name}_summary.json")), &summary)?;
    let mut table = Table::new("driftls.bandit_summary.v1", &["n", "mean_regret", "median_regret", "q90_regret"]);
    for p in &summary.regret {
        table.push(vec![p.n.to_string(), fmt_f64(p.mean), fmt_f64(p.median), fmt_f64(p.q90)]);
    }
    let message = format!(
        "{name}: {} seeds, mean cumulative regret {:.4} at n={}{}",
        runs.len(),
        summary.final_mean_regret,
        settings.horizon,
        summary
            .regret_exponent
            .map(|e| format!(", regret exponent {e:.3}"))
            .unwrap_or_default()
    );
    Ok(Outcome { message, table })
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Exact => "exact",
        Variant::Gd => "gd",
        Variant::Svrg => "svrg",
        Variant::Sag => "sag",
    }
}
