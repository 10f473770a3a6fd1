//! Experiment configuration.
//!
//! Configs are TOML. Every key has a default, so an empty file is valid, and
//! any key can be overridden from the command line with
//! `--set section.key=value` (the value is parsed as a TOML value).

use std::path::{Path, PathBuf};

use csf_core::CsfParams64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Fig2,
    DatalengthSweep,
    SnrSweep,
    InvarianceDemo,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::DatalengthSweep => "datalength_sweep",
            Self::SnrSweep => "snr_sweep",
            Self::InvarianceDemo => "invariance_demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BlindAcf,
    LsGaussian,
    LsChaos,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BlindAcf => "blind_acf",
            Self::LsGaussian => "ls_gaussian",
            Self::LsChaos => "ls_chaos",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsfSection {
    pub beta: f64,
    pub oversampling: usize,
    /// Tail truncation in symbol periods; minimal for `beta` when absent.
    pub pulse_tail: Option<usize>,
}

impl Default for CsfSection {
    fn default() -> Self {
        Self {
            beta: std::f64::consts::LN_2,
            oversampling: csf_core::csf::DEFAULT_OVERSAMPLING,
            pulse_tail: None,
        }
    }
}

impl CsfSection {
    pub fn params(&self) -> Result<CsfParams64> {
        let p = match self.pulse_tail {
            Some(k) => CsfParams64::with_tail(self.beta, self.oversampling, k)?,
            None => CsfParams64::new(self.beta, self.oversampling)?,
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub max_iterations: usize,
    pub detect_threshold: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            detect_threshold: csf_core::estimator::DEFAULT_DETECT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomChannelSection {
    /// Occupied paths including the main path.
    pub paths: usize,
    pub max_delay: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
}

impl Default for RandomChannelSection {
    fn default() -> Self {
        Self {
            paths: 6,
            max_delay: 10,
            gamma_min: 0.3,
            gamma_max: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Section {
    /// Secondary path delays (the main path at 0 is implied).
    pub delays: Vec<usize>,
    pub gamma: f64,
    pub max_delay: usize,
    pub symbols: usize,
    /// Omitted means noiseless.
    pub snr_db: Option<f64>,
    pub max_lag: usize,
    pub expected_peaks: Vec<usize>,
}

impl Default for Fig2Section {
    fn default() -> Self {
        Self {
            delays: vec![2, 7],
            gamma: 0.6,
            max_delay: 10,
            symbols: 1 << 14,
            snr_db: None,
            max_lag: 10,
            expected_peaks: vec![2, 5, 7],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LengthSweepSection {
    pub snr_db: f64,
    /// Received data lengths in samples (symbols × oversampling).
    pub lengths: Vec<usize>,
}

impl Default for LengthSweepSection {
    fn default() -> Self {
        Self {
            snr_db: 10.0,
            lengths: [1024, 2048, 4096, 8192, 16384, 32768, 65536]
                .iter()
                .map(|n| n * 16)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrSweepSection {
    pub snr_db: Vec<f64>,
    /// Received data length in samples per channel set.
    pub samples: usize,
    pub methods: Vec<Method>,
}

impl Default for SnrSweepSection {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            samples: 1024 * 16,
            methods: vec![Method::BlindAcf, Method::LsGaussian, Method::LsChaos],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceSection {
    pub streams: usize,
    pub symbols: usize,
    pub max_lag: usize,
    /// Adds an all-ones stream, reported but excluded from the check.
    pub include_all_ones: bool,
    pub tolerance: f64,
}

impl Default for InvarianceSection {
    fn default() -> Self {
        Self {
            streams: 10,
            symbols: 1 << 12,
            max_lag: 10,
            include_all_ones: true,
            tolerance: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Trial count `D` for the sweeps.
    pub trials: usize,
    pub threads: usize,
    pub out: PathBuf,
    pub csf: CsfSection,
    pub solver: SolverSection,
    pub random_channel: RandomChannelSection,
    pub fig2: Fig2Section,
    pub length_sweep: LengthSweepSection,
    pub snr_sweep: SnrSweepSection,
    pub invariance: InvarianceSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 20240601,
            trials: 20,
            threads: 1,
            out: PathBuf::from("results"),
            csf: CsfSection::default(),
            solver: SolverSection::default(),
            random_channel: RandomChannelSection::default(),
            fig2: Fig2Section::default(),
            length_sweep: LengthSweepSection::default(),
            snr_sweep: SnrSweepSection::default(),
            invariance: InvarianceSection::default(),
        }
    }
}

/// Settings that do not affect results and are left out of the hash.
#[derive(Serialize)]
struct HashedView<'a> {
    experiment: &'a str,
    seed: u64,
    trials: usize,
    csf: &'a CsfSection,
    solver: &'a SolverSection,
    random_channel: &'a RandomChannelSection,
    fig2: &'a Fig2Section,
    length_sweep: &'a LengthSweepSection,
    snr_sweep: &'a SnrSweepSection,
    invariance: &'a InvarianceSection,
}

impl ExperimentConfig {
    /// Defaults, then `file` (if any), then `overrides` (`dotted.key=value`).
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = toml::Table::try_from(Self::default())
            .map_err(|e| HarnessError::Config(format!("serializing defaults: {e}")))?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let user: toml::Table = text
                .parse()
                .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
            merge(&mut table, user);
        }
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e| HarnessError::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        self.csf.params()?;
        let rc = &self.random_channel;
        if rc.paths == 0 || rc.paths > rc.max_delay + 1 {
            return bad(format!(
                "random_channel.paths must be in 1..={}",
                rc.max_delay + 1
            ));
        }
        if !(rc.gamma_min > 0.0 && rc.gamma_max >= rc.gamma_min) {
            return bad("random_channel gamma range must satisfy 0 < min <= max".into());
        }
        if self.fig2.symbols == 0 || self.invariance.symbols == 0 {
            return bad("symbol counts must be >= 1".into());
        }
        if self.invariance.streams < 2 {
            return bad("invariance.streams must be >= 2".into());
        }
        let ns = self.csf.oversampling;
        if self.length_sweep.lengths.is_empty() {
            return bad("length_sweep.lengths must not be empty".into());
        }
        if let Some(l) = self
            .length_sweep
            .lengths
            .iter()
            .chain(std::iter::once(&self.snr_sweep.samples))
            .find(|&&l| l % ns != 0 || l < ns)
        {
            return bad(format!(
                "data length {l} is not a positive multiple of {ns}"
            ));
        }
        if self.snr_sweep.snr_db.is_empty() || self.snr_sweep.methods.is_empty() {
            return bad("snr_sweep needs at least one SNR and one method".into());
        }
        Ok(())
    }

    /// First 16 hex digits of SHA-256 over the result-affecting settings.
    pub fn hash(&self, experiment: ExperimentId) -> String {
        let view = HashedView {
            experiment: experiment.as_str(),
            seed: self.seed,
            trials: self.trials,
            csf: &self.csf,
            solver: &self.solver,
            random_channel: &self.random_channel,
            fig2: &self.fig2,
            length_sweep: &self.length_sweep,
            snr_sweep: &self.snr_sweep,
            invariance: &self.invariance,
        };
        let json = serde_json::to_string(&view).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn merge(base: &mut toml::Table, user: toml::Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn apply_override(table: &mut toml::Table, ov: &str) -> Result<()> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override `{ov}` is not key=value")))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for s in sections {
        cur = match cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        {
            toml::Value::Table(t) => t,
            _ => {
                return Err(HarnessError::Config(format!(
                    "`{s}` in `{key}` is not a section"
                )))
            }
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// TOML scalar/array if it parses as one, else a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    doc.parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_load() {
        let cfg = ExperimentConfig::load(None, &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn overrides_apply() {
        let cfg = ExperimentConfig::load(
            None,
            &[
                "fig2.gamma=0.5".into(),
                "snr_sweep.methods=[\"blind_acf\"]".into(),
                "out=/tmp/x".into(),
                "trials=3".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.fig2.gamma, 0.5);
        assert_eq!(cfg.snr_sweep.methods, vec![Method::BlindAcf]);
        assert_eq!(cfg.out, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.trials, 3);
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        assert!(ExperimentConfig::load(None, &["fig2.gama=0.5".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["trials=0".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["csf.beta=0.9".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["novalue".into()]).is_err());
    }

    #[test]
    fn file_merges_over_defaults() {
        let dir = std::env::temp_dir().join(format!("csf-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.toml");
        std::fs::write(&path, "seed = 5\n[random_channel]\npaths = 3\n").unwrap();
        let cfg = ExperimentConfig::load(Some(&path), &["seed=6".into()]).unwrap();
        assert_eq!(cfg.seed, 6);
        assert_eq!(cfg.random_channel.paths, 3);
        assert_eq!(cfg.random_channel.max_delay, 10);
    }

    #[test]
    fn hash_ignores_runtime_settings() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.threads = 8;
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(ExperimentId::Fig2), b.hash(ExperimentId::Fig2));
        b.seed += 1;
        assert_ne!(a.hash(ExperimentId::Fig2), b.hash(ExperimentId::Fig2));
        assert_ne!(a.hash(ExperimentId::Fig2), a.hash(ExperimentId::SnrSweep));
        assert_eq!(a.hash(ExperimentId::Fig2).len(), 16);
    }
}
