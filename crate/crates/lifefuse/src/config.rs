//! Run configuration: JSON file merged over defaults, then dotted-path
//! `key=value` overrides, then the `LIFEFUSE_SEED` environment variable.

use std::path::{Path, PathBuf};

use lifefuse_core::detectors::{UwbDetectorConfig, UwbSynthConfig};
use lifefuse_core::fusion::{FusionConfig, DEFAULT_RELIABILITY};
use lifefuse_core::sim::ScenarioConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fsutil::read_file;

pub const SEED_ENV: &str = "LIFEFUSE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Stream CSV for `train-fusion`/`eval`, or a run directory for
    /// `report`. Unset means simulate from `scenario`.
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    /// Fusion checkpoint for `eval`; defaults to `<output>/fusion.ckpt`.
    pub checkpoint: Option<PathBuf>,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            input: None,
            output: PathBuf::from("out"),
            checkpoint: None,
        }
    }
}

/// Synthetic UWB training set and schedule for `train-uwb`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UwbTraining {
    pub windows_per_class: usize,
    /// Share of the windows held out for validation.
    pub valid_fraction: f64,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Global gradient-norm ceiling; 0 disables clipping.
    pub clip_norm: f64,
    /// Slow-time rows of the echoes written by `simulate`.
    pub echo_rows: usize,
}

impl Default for UwbTraining {
    fn default() -> Self {
        Self {
            windows_per_class: 48,
            valid_fraction: 0.25,
            epochs: 20,
            batch: 16,
            learning_rate: 1e-3,
            clip_norm: 1.0,
            echo_rows: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, replaces the scenario, fusion and UWB seeds.
    pub seed: Option<u64>,
    pub scenario: ScenarioConfig,
    pub fusion: FusionConfig,
    pub uwb: UwbDetectorConfig,
    pub uwb_synth: UwbSynthConfig,
    pub uwb_training: UwbTraining,
    /// Dempster-Shafer reliability of each sensor.
    pub ds_reliability: [f64; 3],
    pub threshold: f64,
    pub paths: Paths,
    pub emit_plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            scenario: ScenarioConfig::default(),
            fusion: FusionConfig::default(),
            uwb: UwbDetectorConfig::default(),
            uwb_synth: UwbSynthConfig::default(),
            uwb_training: UwbTraining::default(),
            ds_reliability: [DEFAULT_RELIABILITY; 3],
            threshold: 0.5,
            paths: Paths::default(),
            emit_plots: true,
        }
    }
}

/// Overlays `patch` onto `base`; every key in `patch` must already exist.
fn merge(base: &mut Value, patch: Value, prefix: &str) -> Result<()> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (key, value) in p {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                match b.get_mut(&key) {
                    Some(slot) => merge(slot, value, &path)?,
                    None => return Err(Error::Config(format!("unknown config key `{path}`"))),
                }
            }
            Ok(())
        }
        (slot, value) => {
            *slot = value;
            Ok(())
        }
    }
}

/// Sets one dotted path; array elements are addressed by index.
fn set_path(root: &mut Value, dotted: &str, value: Value) -> Result<()> {
    let unknown = || Error::Config(format!("unknown config key `{dotted}`"));
    let mut slot = root;
    for seg in dotted.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(seg).ok_or_else(unknown)?,
            Value::Array(items) => seg
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(unknown)?,
            _ => return Err(unknown()),
        };
    }
    *slot = value;
    Ok(())
}

/// `key=value`; the value is read as JSON when it parses, else as a string.
pub fn parse_override(raw: &str) -> Result<(String, Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("override `{raw}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Usage(format!("override `{raw}` has an empty key")));
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

impl RunConfig {
    /// Builds the effective configuration. `seed_env` is the value of
    /// `LIFEFUSE_SEED`, if set.
    pub fn resolve(
        preset: Option<&str>,
        file: Option<&Path>,
        overrides: &[String],
        seed_env: Option<&str>,
    ) -> Result<Self> {
        let mut base = RunConfig::default();
        if let Some(name) = preset {
            base.fusion = FusionConfig::preset(name).ok_or_else(|| Error::Usage(format!("unknown preset `{name}`")))?;
        }
        let mut value = serde_json::to_value(&base).expect("config serializes");
        if let Some(path) = file {
            let bytes = read_file(path)?;
            let patch: Value =
                serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e.line() as u64, e.to_string()))?;
            if !patch.is_object() {
                return Err(Error::parse(path, 1, "config must be a JSON object"));
            }
            merge(&mut value, patch, "")?;
        }
        for raw in overrides {
            let (key, v) = parse_override(raw)?;
            set_path(&mut value, &key, v)?;
        }
        let mut cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
        if let Some(raw) = seed_env {
            let seed = raw
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")))?;
            cfg.seed = Some(seed);
        }
        if let Some(seed) = cfg.seed {
            cfg.scenario.seed = seed;
            cfg.fusion.seed = seed;
            cfg.uwb.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.fusion.validate()?;
        self.uwb.classifier().validate()?;
        if !self.ds_reliability.iter().all(|r| (0.0..=1.0).contains(r)) {
            return Err(Error::Config(format!(
                "ds_reliability {:?} must lie in [0, 1]",
                self.ds_reliability
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!(
                "threshold {} must lie in [0, 1]",
                self.threshold
            )));
        }
        let t = &self.uwb_training;
        if t.windows_per_class < 2
            || !(0.0..1.0).contains(&t.valid_fraction)
            || t.epochs == 0
            || t.batch == 0
            || !(t.clip_norm >= 0.0)
        {
            return Err(Error::Config(
                "uwb_training needs windows_per_class >= 2, valid_fraction in [0, 1), epochs and batch >= 1, clip_norm >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
