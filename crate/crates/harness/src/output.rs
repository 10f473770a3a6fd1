//! CSV tables and JSON sidecars.
//!
//! Every CSV starts with a `config_hash` column; floats are written with 9
//! significant digits in scientific notation. The sidecar holds the resolved
//! config, seed, `git describe` output and an experiment summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentId};
use crate::error::Result;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

/// Column-ordered table; the hash column is prepended on write.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("config_hash").chain(self.header.iter().copied()))?;
        for row in &self.rows {
            w.write_record(std::iter::once(config_hash).chain(row.iter().map(String::as_str)))?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

#[derive(Serialize)]
struct Sidecar<'a, S: Serialize> {
    experiment: &'static str,
    config_hash: &'a str,
    seed: u64,
    git_describe: String,
    config: &'a ExperimentConfig,
    summary: &'a S,
}

pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<out>/<experiment>.csv` and `<out>/<experiment>.json`.
pub fn write_outputs<S: Serialize>(
    out: &Path,
    experiment: ExperimentId,
    config: &ExperimentConfig,
    table: &Table,
    summary: &S,
) -> Result<OutputPaths> {
    fs::create_dir_all(out)?;
    let hash = config.hash(experiment);
    let csv = out.join(format!("{}.csv", experiment.as_str()));
    fs::write(&csv, table.to_csv(&hash)?)?;
    let sidecar = Sidecar {
        experiment: experiment.as_str(),
        config_hash: &hash,
        seed: config.seed,
        git_describe: git_describe(),
        config,
        summary,
    };
    let json = out.join(format!("{}.json", experiment.as_str()));
    fs::write(&json, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(OutputPaths { csv, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(1.343_327_244_421_493), "1.34332724e0");
        assert_eq!(fmt_float(-0.000_167_640_256), "-1.67640256e-4");
        assert_eq!(fmt_float(0.0), "0.00000000e0");
    }

    #[test]
    fn csv_has_hash_column() {
        let mut t = Table::new(vec!["lag", "value"]);
        t.push(vec!["0".into(), fmt_float(1.5)]);
        let text = String::from_utf8(t.to_csv("abc").unwrap()).unwrap();
        assert_eq!(text, "config_hash,lag,value\nabc,0,1.50000000e0\n");
    }
}
