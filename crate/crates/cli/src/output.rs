//! Artifact writers and seed-level parallelism.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

/// A CSV table whose first line is `# <schema>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, columns: &[&'static str]) -> Self {
        Self {
            schema,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.schema);
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

/// Shortest round-trip representation, so identical runs give identical bytes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

/// Roughly `per_decade` log-spaced points in `[1, horizon]`, always ending at `horizon`.
pub fn log_checkpoints(horizon: u64, per_decade: u32) -> Vec<u64> {
    let mut out = Vec::new();
    if horizon == 0 {
        return out;
    }
    let top = (horizon as f64).log10();
    let steps = (top * per_decade as f64).ceil() as u32;
    for i in 0..=steps {
        let n = 10f64.powf(i as f64 / per_decade as f64).round() as u64;
        let n = n.clamp(1, horizon);
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Thread count from `DRIFTLS_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("DRIFTLS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("DRIFTLS_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

/// Runs `f` for every seed, possibly in parallel; results come back in seed order.
pub fn run_seeds<T, F>(seeds: &[u64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| seeds.par_iter().map(|s| f(*s)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints_are_increasing_and_end_at_horizon() {
        assert!(log_checkpoints(0, 10).is_empty());
        assert_eq!(log_checkpoints(1, 10), vec![1]);
        let c = log_checkpoints(100_000, 5);
        assert_eq!(c.first(), Some(&1));
        assert_eq!(c.last(), Some(&100_000));
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert!(c.contains(&1000));
        let c = log_checkpoints(1234, 4);
        assert_eq!(c.last(), Some(&1234));
    }

    #[test]
    fn table_rendering() {
        let mut t = Table::new("x.v1", &["a", "b"]);
        t.push(vec![fmt_f64(0.1), fmt_opt(None)]);
        assert_eq!(t.render(), "# x.v1\na,b\n0.1,\n");
    }

    #[test]
    fn seeds_keep_order() {
        let out = run_seeds(&[5, 1, 9], |s| Ok(s * 2)).unwrap();
        assert_eq!(out, vec![10, 2, 18]);
    }

    proptest::proptest! {
        #[test]
        fn checkpoint_grid_invariants(horizon in 1u64..10_000_000, per_decade in 1u32..20) {
            let c = log_checkpoints(horizon, per_decade);
            proptest::prop_assert_eq!(c[0], 1);
            proptest::prop_assert_eq!(*c.last().unwrap(), horizon);
            proptest::prop_assert!(c.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
