//! Experiment harness for the `driftls` trackers and bandits.
//!
//! Every subcommand reads a flat `key = value` config (file plus `--key=value`
//! overrides), writes versioned CSV files and a summary JSON under `out`, and
//! returns a short message plus a headline table.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod bandit;
pub mod bench;
pub mod bounds;
pub mod config;
pub mod error;
pub mod gen;
pub mod output;
pub mod schedules;
pub mod streams;
pub mod track;

pub use config::Config;
pub use error::{CliError, Result};

use output::Table;

/// What a subcommand hands back to `main`.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub message: String,
    pub table: Table,
}

#[derive(Debug, Parser)]
#[command(name = "driftls", version, about = "SGD trackers for drifting least-squares targets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tracking error of one SGD tracker against its exact target
    Track(Args),
    /// PEGE, fPEGE-GD and LinUCB variants
    Bandit(Args),
    /// Per-step wall time against the dimension
    Bench(Args),
    /// Monte Carlo check of the tracking error bounds
    Bounds(Args),
    /// Synthetic news event logs
    Gen(Args),
}

#[derive(Debug, Clone, clap::Args)]
pub struct Args {
    /// Flat key = value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seed count or comma-separated list
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Print the headline table as CSV on stdout
    #[arg(long)]
    pub csv: bool,
    /// Any other config key as --key=value
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY=VALUE")]
    pub extra: Vec<String>,
}

impl Args {
    /// Builds the config: file values, then every flag given on the command line.
    pub fn into_config(self) -> Result<Config> {
        let mut overrides = config::parse_overrides(&self.extra)?;
        let mut file = self.config;
        // clap hands everything after the first unknown flag to `extra`,
        // so `config` may turn up there too
        if let Some(pos) = overrides.iter().rposition(|(k, _)| k == "config") {
            let (_, path) = overrides.remove(pos);
            file.get_or_insert(PathBuf::from(path));
            overrides.retain(|(k, _)| k != "config");
        }
        let mut known: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                known.push((k.to_string(), v));
            }
        };
        put("seed", self.seed.map(|v| v.to_string()));
        put("seeds", self.seeds);
        put("out", self.out.map(|p| p.display().to_string()));
        put("algo", self.algo);
        put("variant", self.variant);
        put("d", self.d.map(|v| v.to_string()));
        put("k", self.k.map(|v| v.to_string()));
        put("t", self.t.map(|v| v.to_string()));
        put("horizon", self.horizon.map(|v| v.to_string()));
        if self.csv {
            put("csv", Some("true".into()));
        }
        known.extend(overrides);
        Config::load(file.as_deref(), known)
    }
}

/// Runs a subcommand. The returned flag says whether `--csv` was requested.
pub fn run(cli: Cli) -> Result<(Outcome, bool)> {
    let (args, runner): (Args, fn(&Config) -> Result<Outcome>) = match cli.command {
        Command::Track(a) => (a, track::run_track),
        Command::Bandit(a) => (a, bandit::run_bandit),
        Command::Bench(a) => (a, bench::run_bench),
        Command::Bounds(a) => (a, bounds::run_bounds),
        Command::Gen(a) => (a, gen::run_gen),
    };
    let cfg = args.into_config()?;
    let csv = cfg.get("csv", false)?;
    Ok((runner(&cfg)?, csv))
}
