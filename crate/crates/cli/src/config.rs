//! Flat `key = value` configuration with command-line overrides.
//!
//! Precedence is command line > config file > built-in defaults. Every value
//! read through a getter is recorded so the resolved configuration can be
//! embedded in summaries.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Keys accepted by every subcommand.
pub const COMMON_KEYS: &[&str] = &["seed", "seeds", "out", "csv"];

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    resolved: RefCell<BTreeMap<String, String>>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_kv_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected key = value, got '{line}'", i + 1)));
        };
        let k = normalize_key(k.trim());
        if k.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Parses trailing `--key=value`, `--key value` and bare `--flag` tokens.
pub fn parse_overrides(tokens: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = &tokens[i];
        let Some(body) = tok.strip_prefix("--") else {
            return Err(CliError::Config(format!("unexpected argument '{tok}' (use --key=value)")));
        };
        if let Some((k, v)) = body.split_once('=') {
            out.push((normalize_key(k), v.to_string()));
            i += 1;
        } else if i + 1 < tokens.len() && !tokens[i + 1].starts_with("--") {
            out.push((normalize_key(body), tokens[i + 1].clone()));
            i += 2;
        } else {
            out.push((normalize_key(body), "true".to_string()));
            i += 1;
        }
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    k.replace('-', "_")
}

impl Config {
    pub fn from_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        Self {
            values: pairs.into_iter().collect(),
            resolved: RefCell::new(BTreeMap::new()),
        }
    }

    /// File values first, then overrides on top.
    pub fn load(file: Option<&Path>, overrides: Vec<(String, String)>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Io(std::io::Error::new(e.kind(), format!("cannot read config {}: {e}", path.display())))
            })?;
            values.extend(parse_kv_text(&text)?);
        }
        values.extend(overrides);
        Ok(Self::from_pairs(values))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Rejects keys that the subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !allowed.contains(&k.as_str()) && !COMMON_KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("unknown key '{k}'")));
            }
        }
        Ok(())
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn opt_str(&self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.record(key, v.clone());
        }
        v
    }

    pub fn get<T>(&self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        match self.values.get(key) {
            Some(raw) => {
                let v = raw
                    .parse::<T>()
                    .map_err(|e| CliError::Config(format!("key '{key}': cannot parse '{raw}': {e}")))?;
                self.record(key, raw.clone());
                Ok(v)
            }
            None => {
                self.record(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn opt<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            Some(raw) => {
                let v = raw
                    .parse::<T>()
                    .map_err(|e| CliError::Config(format!("key '{key}': cannot parse '{raw}': {e}")))?;
                self.record(key, raw.clone());
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn required<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.opt(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key '{key}'")))
    }

    /// `seeds` is either a count `N` (seeds `seed..seed+N`) or a comma list.
    pub fn seeds(&self) -> Result<Vec<u64>> {
        self.seeds_or(None)
    }

    /// Like [`Self::seeds`], with a default seed count when `seeds` is unset.
    pub fn seeds_or(&self, default_count: Option<u64>) -> Result<Vec<u64>> {
        let base: u64 = self.get("seed", 0)?;
        let raw = match (self.opt_str("seeds"), default_count) {
            (Some(raw), _) => raw,
            (None, Some(n)) => {
                self.record("seeds", n.to_string());
                n.to_string()
            }
            (None, None) => return Ok(vec![base]),
        };
        let seeds: Vec<u64> = if raw.contains(',') {
            raw.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|e| CliError::Config(format!("key 'seeds': bad seed '{s}': {e}")))
                })
                .collect::<Result<_>>()?
        } else {
            let n: u64 = raw
                .parse()
                .map_err(|e| CliError::Config(format!("key 'seeds': cannot parse '{raw}': {e}")))?;
            (base..base + n).collect()
        };
        if seeds.is_empty() {
            return Err(CliError::Config("seeds must be non-empty".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        Ok(sorted)
    }

    /// Every key read so far with the value that was used.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        self.resolved.borrow().clone()
    }
}
