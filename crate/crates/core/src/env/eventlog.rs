//! JSON-lines event log: one record per line with fields
//! `t`, `arms: [{id, x}]`, and optional `chosen`, `reward`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Arm, NORM_TOL};
use crate::error::{Error, Result};
use crate::linalg::norm2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub t: u64,
    pub arms: Vec<Arm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reward: Option<f64>,
}

impl EventRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let first = self.arms.first().ok_or("record has no arms")?;
        let d = first.x.len();
        if d == 0 {
            return Err("arm feature is empty".into());
        }
        for a in &self.arms {
            if a.x.len() != d {
                return Err(format!("arm {} has dimension {}, expected {d}", a.id, a.x.len()));
            }
            if a.x.iter().any(|v| !v.is_finite()) {
                return Err(format!("arm {} has non-finite features", a.id));
            }
            let n = norm2(&a.x);
            if n > 1.0 + NORM_TOL {
                return Err(format!("arm {} has feature norm {n} > 1", a.id));
            }
        }
        if let Some(c) = self.chosen {
            if !self.arms.iter().any(|a| a.id == c) {
                return Err(format!("chosen arm {c} is not offered"));
            }
        }
        if let Some(r) = self.reward {
            if !r.is_finite() {
                return Err("reward is not finite".into());
            }
        }
        Ok(())
    }

    pub fn arm(&self, id: u64) -> Option<&Arm> {
        self.arms.iter().find(|a| a.id == id)
    }
}

pub fn write_event_log(path: &Path, records: &[EventRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, r) in records.iter().enumerate() {
        r.validate().map_err(|msg| Error::Schema { line: i + 1, msg })?;
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Streaming reader; yields one validated record per non-empty line.
pub struct EventLogReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> EventLogReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl EventLogReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        Ok(Self::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> Iterator for EventLogReader<R> {
    type Item = Result<EventRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e.into())),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let line_no = self.line_no;
            let rec = serde_json::from_str::<EventRecord>(&line)
                .map_err(|e| Error::Schema { line: line_no, msg: e.to_string() })
                .and_then(|r| {
                    r.validate()
                        .map(|_| r)
                        .map_err(|msg| Error::Schema { line: line_no, msg })
                });
            return Some(rec);
        }
    }
}

pub fn read_event_log(path: &Path) -> Result<Vec<EventRecord>> {
    EventLogReader::open(path)?.collect()
}
