//! Report envelope, CSV side-cars and the timings file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{JobConfig, SCHEMA_VERSION};
use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    pub name: String,
    pub version: String,
}

impl Artifact {
    pub fn current() -> Self {
        Self {
            name: "friedrichs".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Structured result document. Wall-clock timings live in a separate file
/// so that the report itself is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<R> {
    pub schema_version: u32,
    pub artifact: Artifact,
    pub command: String,
    pub seed: u64,
    pub config: JobConfig,
    pub status: Status,
    pub summary: String,
    pub warnings: Vec<String>,
    pub side_cars: Vec<String>,
    pub result: R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ValidationFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Ok => 0,
            Self::ValidationFailure => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub command: String,
    pub threads: usize,
    pub phases: Vec<Phase>,
    pub total_seconds: f64,
}

/// Wall-clock stopwatch over named phases.
pub struct Clock {
    start: Instant,
    phases: Vec<Phase>,
}

impl Default for Clock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock {
    pub fn new() -> Self {
        Self {
            start: Instant::now(),
            phases: Vec::new(),
        }
    }

    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.phases.push(Phase {
            name: name.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn finish(self, command: &str) -> Timings {
        Timings {
            command: command.into(),
            threads: rayon::current_num_threads(),
            phases: self.phases,
            total_seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// One CSV side-car: a header and rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self {
            file: file.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(&self.file);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn envelope<R>(command: &str, cfg: &JobConfig, seed: u64, result: R) -> Report<R> {
    Report {
        schema_version: SCHEMA_VERSION,
        artifact: Artifact::current(),
        command: command.into(),
        seed,
        config: cfg.clone(),
        status: Status::Ok,
        summary: String::new(),
        warnings: Vec::new(),
        side_cars: Vec::new(),
        result,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_outputs<R: Serialize>(
    dir: &Path,
    report: &mut Report<R>,
    tables: &[Table],
    timings: &Timings,
) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    report.side_cars = tables.iter().map(|t| t.file.clone()).collect();
    for t in tables {
        t.write(dir)?;
    }
    fs::write(dir.join(&report.config.output.report), to_json(report))?;
    fs::write(dir.join(&report.config.output.timings), to_json(timings))?;
    Ok(())
}
