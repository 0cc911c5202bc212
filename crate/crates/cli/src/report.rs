//! Run artifacts: summary.json, per-subcommand CSVs, manifest.txt and the append-only
//! runs.jsonl. Only manifest.txt and runs.jsonl carry wall-clock time.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{hex, ExperimentConfig, SCHEMA_VERSION};
use crate::error::CliResult;

pub const TOOL: &str = "landau-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// value <= limit
    AtMost,
    /// value >= limit
    AtLeast,
    /// value must equal 1 (a boolean encoded as 0/1)
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, relation: Relation::AtMost, passed: value <= limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, relation: Relation::AtLeast, passed: value >= limit }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, limit: 1.0, relation: Relation::Holds, passed: ok }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// file stem of the CSV
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.into(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Optional numbers print as empty CSV cells.
pub fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub subcommand: String,
    pub tolerances: Value,
    pub checks: Vec<Check>,
    pub results: Value,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub subcommand: &'a str,
    pub config_hash: String,
    pub seed: u64,
    pub passed: bool,
    pub tolerances: &'a Value,
    pub checks: &'a [Check],
    pub results: &'a Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub summary_sha256: String,
    pub subcommand: String,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub outputs: Value,
}

pub fn summary_json(cfg: &ExperimentConfig, outcome: &Outcome) -> CliResult<String> {
    let s = Summary {
        tool: TOOL,
        version: VERSION,
        schema_version: SCHEMA_VERSION,
        subcommand: &outcome.subcommand,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        passed: outcome.passed(),
        tolerances: &outcome.tolerances,
        checks: &outcome.checks,
        results: &outcome.results,
    };
    let mut text = serde_json::to_string_pretty(&s)?;
    text.push('\n');
    Ok(text)
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn write_artifacts(
    out: &Path,
    cfg: &ExperimentConfig,
    source: &[u8],
    outcome: &Outcome,
    started: DateTime<Utc>,
) -> CliResult<()> {
    fs::create_dir_all(out)?;
    let summary = summary_json(cfg, outcome)?;
    fs::write(out.join("summary.json"), &summary)?;

    for t in &outcome.tables {
        let mut w = csv::Writer::from_path(out.join(format!("{}.csv", t.name)))?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }

    let finished = Utc::now();
    let mut manifest = String::new();
    manifest.push_str(&format!("tool: {TOOL} {VERSION}\n"));
    manifest.push_str(&format!("landau-core: {VERSION}\n"));
    manifest.push_str(&format!("schema_version: {SCHEMA_VERSION}\n"));
    manifest.push_str(&format!("subcommand: {}\n", outcome.subcommand));
    manifest.push_str(&format!("config_sha256: {}\n", cfg.hash()));
    manifest.push_str(&format!("config_source_sha256: {}\n", hex(&Sha256::digest(source))));
    manifest.push_str(&format!("seed: {}\n", cfg.seed));
    manifest.push_str(&format!("started: {}\n", stamp(started)));
    manifest.push_str(&format!("finished: {}\n", stamp(finished)));
    manifest.push_str("files: summary.json");
    for t in &outcome.tables {
        manifest.push_str(&format!(" {}.csv", t.name));
    }
    manifest.push('\n');
    fs::write(out.join("manifest.txt"), manifest)?;

    let record = RunRecord {
        config_hash: cfg.hash(),
        summary_sha256: hex(&Sha256::digest(summary.as_bytes())),
        subcommand: outcome.subcommand.clone(),
        seed: cfg.seed,
        version: VERSION.into(),
        started: stamp(started),
        finished: stamp(finished),
        passed: outcome.passed(),
        checks: outcome.checks.clone(),
        outputs: outcome.results.clone(),
    };
    let mut log = OpenOptions::new().create(true).append(true).open(out.join("runs.jsonl"))?;
    writeln!(log, "{}", serde_json::to_string(&record)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome() -> Outcome {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), cell::<f64>(None)]);
        Outcome {
            subcommand: "demo".into(),
            tolerances: serde_json::json!({"x": 0.1}),
            checks: vec![Check::at_most("x", 0.05, 0.1), Check::holds("y", true)],
            results: serde_json::json!({"z": [1.0, 2.5]}),
            tables: vec![t],
        }
    }

    #[test]
    fn checks_compare_as_labelled() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("a", 0.9, 0.95).passed);
        assert!(!Check::holds("a", false).passed);
    }

    #[test]
    fn artifacts_and_append_only_log() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig::default();
        let o = outcome();
        write_artifacts(dir.path(), &cfg, b"", &o, Utc::now()).unwrap();
        let first = fs::read(dir.path().join("summary.json")).unwrap();
        write_artifacts(dir.path(), &cfg, b"", &o, Utc::now()).unwrap();
        assert_eq!(fs::read(dir.path().join("summary.json")).unwrap(), first);
        let log = fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
        let records: Vec<RunRecord> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].summary_sha256, records[1].summary_sha256);
        assert_eq!(records[0].config_hash, cfg.hash());
        let csv = fs::read_to_string(dir.path().join("demo.csv")).unwrap();
        assert_eq!(csv, "a,b\n1,\n");
        let summary = String::from_utf8(first).unwrap();
        assert!(summary.contains(&cfg.hash()));
        assert!(!summary.contains("started"));
    }
}
