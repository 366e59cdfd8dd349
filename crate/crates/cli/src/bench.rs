//! `bench`: per-step wall time of the trackers against the exact
//! Sherman-Morrison update, as a function of the dimension.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use driftls::env::random_unit_vector;
use driftls::exact::OlsState;
use driftls::metrics::{quantile, slope_fit};
use driftls::rng::{rng_for, stream, ExpRng};
use driftls::schedule::{RegSchedule, StepSchedule};
use driftls::trackers::{DataBuffer, PhiState, Tracker};
use rand::Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_f64, write_json, Table};
use crate::Outcome;

pub const BENCH_SCHEMA: &str = "driftls.bench.v1";

const KEYS: &[&str] = &["algos", "dims", "steps", "warmup", "batch", "buffer"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchAlgo {
    Fols,
    Frls,
    Phi,
    /// Exact OLS append: normal-equation update plus Sherman-Morrison.
    Sm,
}

impl BenchAlgo {
    pub fn name(self) -> &'static str {
        match self {
            BenchAlgo::Fols => "fols",
            BenchAlgo::Frls => "frls",
            BenchAlgo::Phi => "phi",
            BenchAlgo::Sm => "sm",
        }
    }
}

impl FromStr for BenchAlgo {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "fols" => BenchAlgo::Fols,
            "frls" => BenchAlgo::Frls,
            "phi" => BenchAlgo::Phi,
            "sm" => BenchAlgo::Sm,
            other => return Err(CliError::Config(format!("unknown bench algorithm '{other}'"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchSettings {
    pub algos: Vec<BenchAlgo>,
    pub dims: Vec<usize>,
    pub steps: usize,
    pub warmup: usize,
    pub batch: usize,
    /// Number of stored samples the trackers draw from.
    pub buffer: usize,
}

fn parse_list<T: FromStr>(raw: &str, key: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("bad entry '{s}' in {key}")))
        })
        .collect()
}

impl BenchSettings {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut algos: Vec<BenchAlgo> = cfg
            .str("algos", "fols,frls,phi,sm")
            .split(',')
            .map(BenchAlgo::from_str)
            .collect::<Result<_>>()?;
        algos.sort();
        algos.dedup();
        let mut dims: Vec<usize> = parse_list(&cfg.str("dims", "16,64,256,1024"), "dims")?;
        dims.sort_unstable();
        dims.dedup();
        let s = Self {
            algos,
            dims,
            steps: cfg.get("steps", 10_000)?,
            warmup: cfg.get("warmup", 1000)?,
            batch: cfg.get("batch", 100)?,
            buffer: cfg.get("buffer", 1000)?,
        };
        if s.dims.is_empty() || s.dims[0] == 0 {
            return Err(CliError::Config("dims must be a non-empty list of positive integers".into()));
        }
        if s.batch == 0 || s.steps < s.batch || s.buffer == 0 {
            return Err(CliError::Config("need batch >= 1, steps >= batch and buffer >= 1".into()));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub algo: BenchAlgo,
    pub d: usize,
    pub median_ns: f64,
    pub p90_ns: f64,
    pub steps: usize,
}

fn sample(d: usize, theta: &[f64], rng: &mut ExpRng) -> (Vec<f64>, f64) {
    let x = random_unit_vector(d, rng);
    let y = driftls::linalg::dot(&x, theta) + rng.random_range(-1.0..1.0);
    (x, y)
}

/// Times `steps` calls of `step` in batches, after `warmup` untimed calls.
/// Returns per-step nanoseconds for each batch.
fn time_batches(s: &BenchSettings, mut step: impl FnMut() -> Result<()>) -> Result<Vec<f64>> {
    for _ in 0..s.warmup {
        step()?;
    }
    let batches = s.steps / s.batch;
    let mut out = Vec::with_capacity(batches);
    for _ in 0..batches {
        let t0 = Instant::now();
        for _ in 0..s.batch {
            step()?;
        }
        out.push(t0.elapsed().as_nanos() as f64 / s.batch as f64);
    }
    Ok(out)
}

pub fn bench_one(s: &BenchSettings, algo: BenchAlgo, d: usize, seed: u64) -> Result<BenchRow> {
    let mut data_rng = rng_for(seed, stream::FEATURES);
    let theta = random_unit_vector(d, &mut rng_for(seed, stream::PROBLEM));
    let mut rng = rng_for(seed, stream::SAMPLING);
    let per_step = match algo {
        BenchAlgo::Fols | BenchAlgo::Frls | BenchAlgo::Phi => {
            let mut buf = DataBuffer::with_capacity(d, s.buffer);
            for _ in 0..s.buffer {
                let (x, y) = sample(d, &theta, &mut data_rng);
                buf.push(&x, y)?;
            }
            match algo {
                BenchAlgo::Fols => {
                    let mut t = Tracker::new(d, StepSchedule::Generic { c: 1.0, c1: 100.0 });
                    time_batches(s, || Ok(t.fols_step(black_box(&buf), &mut rng)?))?
                }
                BenchAlgo::Frls => {
                    let mut t = Tracker::new(d, StepSchedule::Generic { c: 1.0, c1: 100.0 })
                        .with_reg(RegSchedule::Power { alpha: 0.6 });
                    time_batches(s, || Ok(t.frls_step(black_box(&buf), &mut rng)?))?
                }
                _ => {
                    let mut phi = PhiState::new(random_unit_vector(d, &mut data_rng));
                    time_batches(s, || Ok(phi.phi_step(black_box(&buf), 0.01, &mut rng)?))?
                }
            }
        }
        BenchAlgo::Sm => {
            // refactorization is switched off so every timed step is a pure rank-1 update
            let mut ols = OlsState::new(d).with_refactor_every(usize::MAX);
            while !ols.is_ready() {
                let (x, y) = sample(d, &theta, &mut data_rng);
                ols.append_xy(&x, y)?;
            }
            let total = s.warmup + s.steps;
            let stream: Vec<(Vec<f64>, f64)> = (0..total.min(s.buffer.max(s.batch)))
                .map(|_| sample(d, &theta, &mut data_rng))
                .collect();
            let mut i = 0usize;
            time_batches(s, || {
                let (x, y) = &stream[i % stream.len()];
                i += 1;
                Ok(ols.append_xy(black_box(x), *y)?)
            })?
        }
    };
    Ok(BenchRow {
        algo,
        d,
        median_ns: quantile(&per_step, 0.5),
        p90_ns: quantile(&per_step, 0.9),
        steps: per_step.len() * s.batch,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub schema: &'static str,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<BenchRow>,
    /// Log-log slope of median step time against `d`, per algorithm.
    pub slopes: BTreeMap<String, f64>,
    /// Median `sm` step time over each tracker's, at the largest `d`.
    pub speedup_at_max_d: BTreeMap<String, f64>,
}

pub fn summarize(rows: Vec<BenchRow>, seed: u64, config: BTreeMap<String, String>) -> BenchSummary {
    let mut slopes = BTreeMap::new();
    let mut speedup = BTreeMap::new();
    let max_d = rows.iter().map(|r| r.d).max().unwrap_or(0);
    let sm_top = rows.iter().find(|r| r.algo == BenchAlgo::Sm && r.d == max_d).map(|r| r.median_ns);
    let mut algos: Vec<BenchAlgo> = rows.iter().map(|r| r.algo).collect();
    algos.dedup();
    for a in algos {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.algo == a)
            .map(|r| (r.d as f64, r.median_ns))
            .collect();
        if let Ok(s) = slope_fit(&pts) {
            slopes.insert(a.name().to_string(), s);
        }
        if a != BenchAlgo::Sm {
            let top = rows.iter().find(|r| r.algo == a && r.d == max_d).map(|r| r.median_ns);
            if let (Some(sm), Some(t)) = (sm_top, top) {
                speedup.insert(a.name().to_string(), sm / t);
            }
        }
    }
    BenchSummary { schema: BENCH_SCHEMA, seed, config, rows, slopes, speedup_at_max_d: speedup }
}

pub fn bench_table(rows: &[BenchRow]) -> Table {
    let mut t = Table::new(BENCH_SCHEMA, &["algo", "d", "median_ns", "p90_ns", "steps"]);
    for r in rows {
        t.push(vec![
            r.algo.name().to_string(),
            r.d.to_string(),
            fmt_f64(r.median_ns),
            fmt_f64(r.p90_ns),
            r.steps.to_string(),
        ]);
    }
    t
}

/// Runs serially: concurrent timing runs would disturb each other.
pub fn run_bench(cfg: &Config) -> Result<Outcome> {
    cfg.check_keys(KEYS)?;
    let s = BenchSettings::from_config(cfg)?;
    let seed = cfg.seeds()?[0];
    let out = ensure_dir(&PathBuf::from(cfg.str("out", "out")))?;
    let mut rows = Vec::new();
    for &algo in &s.algos {
        for &d in &s.dims {
            rows.push(bench_one(&s, algo, d, seed)?);
        }
    }
    let table = bench_table(&rows);
    table.write(&out.join("bench.csv"))?;
    let summary = summarize(rows, seed, cfg.resolved());
    write_json(&out.join("bench_summary.json"), &summary)?;
    let slopes: Vec<String> = summary.slopes.iter().map(|(k, v)| format!("{k} {v:.2}")).collect();
    Ok(Outcome { message: format!("bench: step-time slopes vs d: {}", slopes.join(", ")), table })
}
