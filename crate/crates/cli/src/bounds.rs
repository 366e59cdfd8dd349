//! `bounds`: Monte Carlo check of the tracking-error bounds for fOLS-GD.

use std::path::PathBuf;

use driftls::bounds::{expectation_bound, high_prob_bound, BoundParams};
use driftls::metrics::mean;
use driftls::schedule::StepSchedule;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_f64, run_seeds, write_json, Table};
use crate::track::{run_seed, run_table, Algo, TrackSettings};
use crate::Outcome;

pub const BOUNDS_SCHEMA: &str = "driftls.bounds.v1";

const KEYS: &[&str] = &["d", "horizon", "noise", "theta_norm", "c", "mu", "n0", "delta", "first_pow", "stream"];

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub n: u64,
    pub mean_err: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub schema: &'static str,
    pub config: std::collections::BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub mu: f64,
    pub c: f64,
    pub n0: u64,
    pub delta: f64,
    pub mean_init_dist: f64,
    pub rows: Vec<BoundRow>,
    pub final_n: u64,
    /// Fraction of runs above `K2(n)/sqrt(n+c)` at the final checkpoint.
    pub exceed_fraction: f64,
    pub expectation_ok: bool,
    pub high_prob_ok: bool,
    pub pass: bool,
}

pub fn powers_of_two(first_pow: u32, horizon: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (first_pow..63)
        .map(|k| 1u64 << k)
        .take_while(|n| *n <= horizon)
        .collect();
    if v.last() != Some(&horizon) && horizon >= 1 {
        v.push(horizon);
    }
    v
}

pub fn evaluate(cfg: &Config) -> Result<(BoundsReport, Vec<crate::track::TrackRun>)> {
    cfg.check_keys(KEYS)?;
    let d: usize = cfg.get("d", 5)?;
    if d == 0 {
        return Err(CliError::Config("d must be >= 1".into()));
    }
    let mu: f64 = cfg.get("mu", 1.0 / (2.0 * d as f64))?;
    let c: f64 = cfg.get("c", 3.2 / mu)?;
    let n0: u64 = cfg.get("n0", d as u64)?;
    let delta: f64 = cfg.get("delta", 0.1)?;
    let horizon: u64 = cfg.get("horizon", 1 << 17)?;
    let first_pow: u32 = cfg.get("first_pow", 7)?;
    let probe = BoundParams { mu, c, d, n0, delta, theta_init_dist: 0.0 };
    probe
        .check()
        .map_err(|e| CliError::Config(format!("refusing to evaluate bounds: {e}")))?;
    let checkpoints = powers_of_two(first_pow, horizon);
    let settings = TrackSettings {
        algo: Algo::Fols,
        stream: cfg.str("stream", "cyclic").parse()?,
        d,
        horizon,
        noise: cfg.str("noise", "uniform").parse()?,
        theta_norm: cfg.get("theta_norm", 1.0)?,
        step: StepSchedule::RateOptimal { c },
        reg: driftls::schedule::RegSchedule::Zero,
        frozen: 0,
        checkpoints,
        average_from: None,
        timing: false,
        mu,
        n0,
    };
    let seeds = cfg.seeds_or(Some(100))?;
    let runs = run_seeds(&seeds, |seed| run_seed(&settings, seed))?;

    let dists: Vec<f64> = runs.iter().map(|r| r.init_dist.unwrap_or(0.0)).collect();
    let mean_dist = mean(&dists);
    let params = BoundParams { theta_init_dist: mean_dist, ..probe };
    let mut rows = Vec::new();
    for n in settings.checkpoints.iter().copied().filter(|n| *n > n0) {
        let errs: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.records.iter().find(|rec| rec.n == n).map(|rec| rec.err))
            .collect();
        if errs.is_empty() {
            continue;
        }
        let m = mean(&errs);
        let bound = expectation_bound(n, &params)?;
        rows.push(BoundRow { n, mean_err: m, bound, ok: m <= bound });
    }
    let final_n = horizon;
    let mut exceed = 0usize;
    let mut counted = 0usize;
    for (r, dist0) in runs.iter().zip(&dists) {
        if let Some(rec) = r.records.iter().find(|rec| rec.n == final_n) {
            let own = BoundParams { theta_init_dist: *dist0, ..probe };
            counted += 1;
            if final_n > n0 && rec.err > high_prob_bound(final_n, &own)? {
                exceed += 1;
            }
        }
    }
    let exceed_fraction = if counted == 0 { 0.0 } else { exceed as f64 / counted as f64 };
    let expectation_ok = rows.iter().all(|r| r.ok);
    let high_prob_ok = exceed_fraction <= delta;
    let report = BoundsReport {
        schema: BOUNDS_SCHEMA,
        config: cfg.resolved(),
        seeds,
        mu,
        c,
        n0,
        delta,
        mean_init_dist: mean_dist,
        rows,
        final_n,
        exceed_fraction,
        expectation_ok,
        high_prob_ok,
        pass: expectation_ok && high_prob_ok,
    };
    Ok((report, runs))
}

pub fn report_table(report: &BoundsReport) -> Table {
    let mut t = Table::new(BOUNDS_SCHEMA, &["n", "mean_err", "k1_bound", "ok"]);
    for r in &report.rows {
        t.push(vec![r.n.to_string(), fmt_f64(r.mean_err), fmt_f64(r.bound), r.ok.to_string()]);
    }
    t
}

pub fn run_bounds(cfg: &Config) -> Result<Outcome> {
    let out = ensure_dir(&PathBuf::from(cfg.str("out", "out")))?;
    let (report, runs) = evaluate(cfg)?;
    for r in &runs {
        run_table(r).write(&out.join(format!("bounds_seed{}.csv", r.seed)))?;
    }
    let table = report_table(&report);
    table.write(&out.join("bounds_report.csv"))?;
    write_json(&out.join("bounds_summary.json"), &report)?;
    let message = format!(
        "bounds: {} seeds, expectation bound {} at {} checkpoints, exceedance {:.3} (delta {}) -> {}",
        report.seeds.len(),
        if report.expectation_ok { "held" } else { "violated" },
        report.rows.len(),
        report.exceed_fraction,
        report.delta,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if !report.pass {
        return Err(CliError::Check(message));
    }
    Ok(Outcome { message, table })
}
