//! `gen`: writes synthetic news-recommendation event logs.

use std::path::PathBuf;

use driftls::env::{read_event_log, synth_news_stream, NewsStreamConfig};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, fmt_f64, Table};
use crate::Outcome;

pub const GEN_SCHEMA: &str = "driftls.gen.v1";

const KEYS: &[&str] = &["d", "k", "horizon", "density", "fixed_pool", "theta_norm", "path"];

pub fn news_config(cfg: &Config) -> Result<NewsStreamConfig> {
    let def = NewsStreamConfig::default();
    Ok(NewsStreamConfig {
        d: cfg.get("d", def.d)?,
        k: cfg.get("k", def.k)?,
        horizon: cfg.get("horizon", def.horizon)?,
        density: cfg.get("density", def.density)?,
        fixed_pool: cfg.get("fixed_pool", def.fixed_pool)?,
        theta_norm: cfg.get("theta_norm", def.theta_norm)?,
    })
}

/// One log per seed, `news_seed{s}.jsonl` under `out`, unless `path` names a
/// single file (then exactly one seed is allowed).
pub fn run_gen(cfg: &Config) -> Result<Outcome> {
    cfg.check_keys(KEYS)?;
    let news = news_config(cfg)?;
    let seeds = cfg.seeds()?;
    let explicit = cfg.opt_str("path").map(PathBuf::from);
    if explicit.is_some() && seeds.len() != 1 {
        return Err(CliError::Config("path= takes exactly one seed".into()));
    }
    let out = PathBuf::from(cfg.str("out", "out"));
    let mut table = Table::new(GEN_SCHEMA, &["seed", "path", "events", "clicks"]);
    for &seed in &seeds {
        let path = match &explicit {
            Some(p) => {
                if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                    ensure_dir(parent)?;
                }
                p.clone()
            }
            None => ensure_dir(&out)?.join(format!("news_seed{seed}.jsonl")),
        };
        synth_news_stream(&news, seed, &path)?;
        let records = read_event_log(&path)?;
        let clicks: f64 = records.iter().filter_map(|r| r.reward).sum();
        table.push(vec![
            seed.to_string(),
            path.display().to_string(),
            records.len().to_string(),
            fmt_f64(clicks),
        ]);
    }
    Ok(Outcome { message: format!("gen: wrote {} event log(s)", seeds.len()), table })
}
