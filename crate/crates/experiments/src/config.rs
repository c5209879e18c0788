//! Experiment configuration files.
//!
//! Configs are TOML. Every table rejects unknown keys, so a misspelt option
//! is an error rather than a silently ignored default. Values can be
//! overridden from the command line with dotted keys (`grid.ks=[1,2]`,
//! `ensemble.n=11`, `trials=2`); the override value is parsed as a TOML value
//! and falls back to a bare string.

use quasilin::greedy::{GreedyConfig, SubsolverConfig};
use quasilin::thresholding::MuRule;
use quasilin::EnsembleSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn one() -> usize {
    1
}
fn default_p_greedy() -> f64 {
    2.0
}
fn default_stages() -> usize {
    9
}
fn default_floor_ratio() -> f64 {
    1e-4
}
fn default_ist_iters() -> usize {
    5000
}
fn default_ist_tol() -> f64 {
    1e-9
}
fn default_iht_iters() -> usize {
    2000
}
fn default_iht_tol() -> f64 {
    1e-12
}
fn default_phase_tol() -> f64 {
    1e-3
}
fn default_threshold_tol() -> f64 {
    1e-2
}
fn default_norm_floor() -> f64 {
    0.01
}
fn default_norm() -> f64 {
    1.0
}
fn default_k() -> usize {
    1
}
fn default_resolution() -> usize {
    72
}
fn default_p_probe() -> f64 {
    2.0
}
fn default_phi_points() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registered experiment name; required by `grid`, `probe` and `astero`.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    pub ensemble: EnsembleSpec,
    /// Output directory; falls back to `--out`, then `QUASILIN_OUT`, then `out`.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub signal: SignalSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub greedy: GreedySection,
    #[serde(default)]
    pub ist: IstSection,
    #[serde(default)]
    pub iht: IhtSection,
    #[serde(default)]
    pub success: SuccessSection,
    #[serde(default)]
    pub ratemap: Option<RateMapSection>,
    #[serde(default)]
    pub probes: Vec<ProbeEntry>,
    #[serde(default)]
    pub astero: Option<AsteroSection>,
}

/// How the ground-truth signal is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportRule {
    /// Uniformly random support over all indices.
    #[default]
    Uniform,
    /// Uniformly random support among the first `max_index` indices.
    LowFrequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_norm")]
    pub norm: f64,
    #[serde(default)]
    pub support: SupportRule,
    #[serde(default)]
    pub max_index: Option<usize>,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            k: default_k(),
            norm: default_norm(),
            support: SupportRule::Uniform,
            max_index: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub ks: Vec<usize>,
    /// Measurement counts, one rate column each; empty means `ensemble.n` only.
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub norms: Option<NormAxis>,
}

/// `count` log-spaced norms from `min` to `max` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl NormAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let (a, b) = (self.min.log10(), self.max.log10());
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    10f64.powf(a + (b - a) * i as f64 / (self.count - 1) as f64)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreedySection {
    #[serde(default = "default_p_greedy")]
    pub p: f64,
    /// Number of greedy steps in single runs; grids use each `k`.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub residual_tol: f64,
    #[serde(default)]
    pub subsolver: SubsolverConfig,
}

impl Default for GreedySection {
    fn default() -> Self {
        Self {
            p: default_p_greedy(),
            k_max: None,
            residual_tol: 0.0,
            subsolver: SubsolverConfig::default(),
        }
    }
}

impl GreedySection {
    pub fn to_config(&self, k_max: usize, seed: u64) -> GreedyConfig {
        GreedyConfig {
            p: self.p,
            k_max,
            residual_tol: self.residual_tol,
            subsolver: self.subsolver.clone(),
            seed,
        }
    }
}

/// Soft thresholding run along a geometric `alpha` path from
/// `0.1 ||F(0)* b||_inf` down by `floor_ratio`, unless `alpha` fixes a single stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IstSection {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_stages")]
    pub stages: usize,
    #[serde(default = "default_floor_ratio")]
    pub floor_ratio: f64,
    #[serde(default = "default_ist_iters")]
    pub max_iters: usize,
    /// Iterate-difference stop, relative to the signal norm.
    #[serde(default = "default_ist_tol")]
    pub stop_tol_rel: f64,
}

impl Default for IstSection {
    fn default() -> Self {
        Self {
            alpha: None,
            stages: default_stages(),
            floor_ratio: default_floor_ratio(),
            max_iters: default_ist_iters(),
            stop_tol_rel: default_ist_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IhtSection {
    #[serde(default)]
    pub mu: MuRule,
    #[serde(default = "default_iht_iters")]
    pub max_iters: usize,
    #[serde(default = "default_iht_tol")]
    pub stop_tol_rel: f64,
}

impl Default for IhtSection {
    fn default() -> Self {
        Self {
            mu: MuRule::default(),
            max_iters: default_iht_iters(),
            stop_tol_rel: default_iht_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessSection {
    /// Phase retrieval: success iff sign-aligned error <= phase_tol * ||x||.
    #[serde(default = "default_phase_tol")]
    pub phase_tol: f64,
    /// Thresholding: success iff error <= threshold_tol * max(||x||, norm_floor).
    #[serde(default = "default_threshold_tol")]
    pub threshold_tol: f64,
    #[serde(default = "default_norm_floor")]
    pub norm_floor: f64,
}

impl Default for SuccessSection {
    fn default() -> Self {
        Self {
            phase_tol: default_phase_tol(),
            threshold_tol: default_threshold_tol(),
            norm_floor: default_norm_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateMapSection {
    pub ks: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// Index into `thresholds` of the threshold the acceptance band refers to.
    #[serde(default)]
    pub middle: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    pub draws: usize,
    #[serde(default = "default_p_probe")]
    pub p: f64,
}

/// One probe of the suite. `condition` selects a registered probe runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeEntry {
    pub name: String,
    pub condition: String,
    pub ensemble: EnsembleSpec,
    pub k: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_p_probe")]
    pub p: f64,
    /// Fixed lower-bound threshold.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Threshold as this fraction of the median ratio of an independent pilot run.
    #[serde(default)]
    pub calibrate: Option<f64>,
    /// Norm of the anchor signal `x` (a random unit k-sparse vector scaled).
    #[serde(default = "default_norm")]
    pub signal_norm: f64,
    /// Extra tail mass: `x` gets `k + tail` nonzeros decaying by `tail_ratio`.
    #[serde(default)]
    pub tail: usize,
    #[serde(default)]
    pub tail_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsteroCase {
    pub name: String,
    /// Number of greedy steps, and the sparsity of sparse cases.
    pub k: usize,
    /// Nonzero frequency indices are drawn from `0..max_index`.
    pub max_index: usize,
    /// When set, the signal has `max_index` nonzeros decaying by this ratio
    /// in random order instead of `k` Gaussian ones.
    #[serde(default)]
    pub decay: Option<f64>,
    #[serde(default = "default_norm")]
    pub norm: f64,
    /// Smallest admissible magnitude of a sparse coefficient relative to the largest.
    #[serde(default)]
    pub min_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsteroSection {
    pub seeds: Vec<u64>,
    pub cases: Vec<AsteroCase>,
    #[serde(default = "default_phi_points")]
    pub phi_points: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string(), overrides)
    }

    pub fn from_toml_str(text: &str, origin: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let parse_err = |e: &dyn std::fmt::Display| ConfigError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        };
        let mut table: toml::Table = text.parse().map_err(|e| parse_err(&e))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e| parse_err(&e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if let Err(e) = self.ensemble.validate() {
            return bad(e.to_string());
        }
        if self.grid.ks.contains(&0) {
            return bad("grid.ks must be >= 1".into());
        }
        if let Some(ax) = &self.grid.norms {
            if !(ax.min > 0.0 && ax.max >= ax.min && ax.count >= 1 && ax.max.is_finite()) {
                return bad("grid.norms needs 0 < min <= max and count >= 1".into());
            }
        }
        if !(self.signal.norm > 0.0) || self.signal.k == 0 {
            return bad("signal needs k >= 1 and norm > 0".into());
        }
        if let Err(e) = self.greedy.to_config(1, 0).subsolver.validate() {
            return bad(e.to_string());
        }
        if self.ist.stages == 0 || !(self.ist.floor_ratio > 0.0 && self.ist.floor_ratio < 1.0) {
            return bad("ist needs stages >= 1 and floor_ratio in (0, 1)".into());
        }
        if let Some(rm) = &self.ratemap {
            if rm.middle >= rm.thresholds.len() {
                return bad("ratemap.middle must index into ratemap.thresholds".into());
            }
        }
        Ok(())
    }
}

/// Sets `key.path=value` in a TOML table, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override(spec.to_string()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError::Override(spec.to_string()));
    }
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::Invalid(format!("override `{key}`: `{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
