//! Run configuration: defaults, JSON config files, flag overrides, and
//! validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disorder::ResampleRule;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("configuration error in `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Named experiment presets differing in ensemble size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// 400 coin maps per disorder level.
    Experimental,
    /// 10 000 coin maps per disorder level.
    Numerical,
}

impl Mode {
    pub fn default_maps(self) -> usize {
        match self {
            Mode::Experimental => 400,
            Mode::Numerical => 10_000,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "experimental" => Ok(Mode::Experimental),
            "numerical" => Ok(Mode::Numerical),
            other => Err(format!(
                "expected `experimental` or `numerical`, got `{other}`"
            )),
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub p_values: Vec<f64>,
    pub steps: usize,
    pub recorded_steps: Vec<usize>,
    pub maps: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub min_prob: f64,
    pub b_min: f64,
    pub b_max: f64,
    /// Spatial-fit window `|x| ≤ fit_window`; `None` defaults to 70% of the
    /// walk length, which keeps the profile fit off the light-cone front.
    pub fit_window: Option<usize>,
    pub resample: ResampleRule,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_values: vec![0.0, 0.1, 0.2, 0.3, 0.5, 1.0],
            steps: 20,
            recorded_steps: vec![5, 8, 11, 14, 17, 20],
            maps: Mode::Numerical.default_maps(),
            master_seed: 20200521,
            output_dir: PathBuf::from("out"),
            min_prob: crate::fit::DEFAULT_MIN_PROB,
            b_min: crate::fit::DEFAULT_B_RANGE.0,
            b_max: crate::fit::DEFAULT_B_RANGE.1,
            fit_window: None,
            resample: ResampleRule::All,
        }
    }
}

/// On-disk config format; every field is optional and falls back to the
/// defaults. Unknown keys are rejected by name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    p_values: Option<Vec<f64>>,
    steps: Option<usize>,
    recorded_steps: Option<Vec<usize>>,
    mode: Option<Mode>,
    maps: Option<usize>,
    master_seed: Option<u64>,
    output_dir: Option<PathBuf>,
    min_prob: Option<f64>,
    b_min: Option<f64>,
    b_max: Option<f64>,
    fit_window: Option<usize>,
    resample: Option<ResampleRule>,
}

/// Flag-level overrides; any set field wins over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub p_values: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub maps: Option<usize>,
    pub mode: Option<Mode>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub min_prob: Option<f64>,
    pub fit_window: Option<usize>,
    pub resample: Option<ResampleRule>,
}

impl RunConfig {
    /// Resolve a config from an optional JSON file plus flag overrides,
    /// apply defaults, and validate.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
        let parsed = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                serde_json::from_str::<ConfigFile>(&text)?
            }
            None => ConfigFile::default(),
        };
        let mut config = RunConfig::default();

        // file layer
        let mut mode = parsed.mode;
        if let Some(v) = parsed.p_values {
            config.p_values = v;
        }
        if let Some(v) = parsed.steps {
            config.steps = v;
        }
        if let Some(v) = parsed.recorded_steps {
            config.recorded_steps = v;
        }
        if let Some(v) = parsed.master_seed {
            config.master_seed = v;
        }
        if let Some(v) = parsed.output_dir {
            config.output_dir = v;
        }
        if let Some(v) = parsed.min_prob {
            config.min_prob = v;
        }
        if let Some(v) = parsed.b_min {
            config.b_min = v;
        }
        if let Some(v) = parsed.b_max {
            config.b_max = v;
        }
        if parsed.fit_window.is_some() {
            config.fit_window = parsed.fit_window;
        }
        if let Some(v) = parsed.resample {
            config.resample = v;
        }
        let mut maps = parsed.maps;

        // flag layer
        if let Some(v) = &overrides.p_values {
            config.p_values = v.clone();
        }
        if let Some(v) = overrides.steps {
            config.steps = v;
        }
        if overrides.mode.is_some() {
            mode = overrides.mode;
        }
        if let Some(v) = overrides.maps {
            maps = Some(v);
        }
        if let Some(v) = overrides.master_seed {
            config.master_seed = v;
        }
        if let Some(v) = &overrides.output_dir {
            config.output_dir = v.clone();
        }
        if let Some(v) = overrides.min_prob {
            config.min_prob = v;
        }
        if overrides.fit_window.is_some() {
            config.fit_window = overrides.fit_window;
        }
        if let Some(v) = overrides.resample {
            config.resample = v;
        }

        // an explicit map count beats the mode preset
        config.maps = maps.unwrap_or_else(|| mode.unwrap_or(Mode::Numerical).default_maps());

        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.p_values.is_empty() {
            return Err(ConfigError::Invalid {
                key: "p_values",
                reason: "must not be empty".into(),
            });
        }
        for &p in &self.p_values {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(ConfigError::Invalid {
                    key: "p_values",
                    reason: format!("entry {p} outside [0, 1]"),
                });
            }
        }
        if self.steps == 0 {
            return Err(ConfigError::Invalid {
                key: "steps",
                reason: "must be at least 1".into(),
            });
        }
        if self.recorded_steps.is_empty()
            || self.recorded_steps.iter().any(|&t| t < 1 || t > self.steps)
        {
            return Err(ConfigError::Invalid {
                key: "recorded_steps",
                reason: format!("entries must lie in [1, {}]", self.steps),
            });
        }
        if self.maps == 0 {
            return Err(ConfigError::Invalid {
                key: "maps",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.min_prob >= 0.0 && self.min_prob < 1.0) {
            return Err(ConfigError::Invalid {
                key: "min_prob",
                reason: format!("must lie in [0, 1), got {}", self.min_prob),
            });
        }
        if !(self.b_min > 0.0 && self.b_max > self.b_min) {
            return Err(ConfigError::Invalid {
                key: "b_min",
                reason: format!(
                    "need 0 < b_min < b_max, got [{}, {}]",
                    self.b_min, self.b_max
                ),
            });
        }
        if let Some(w) = self.fit_window {
            if w < 2 || w > self.steps {
                return Err(ConfigError::Invalid {
                    key: "fit_window",
                    reason: format!("must lie in [2, steps], got {w}"),
                });
            }
        }
        Ok(())
    }

    /// The spatial-fit window actually applied: explicit value, or 70% of
    /// the walk length rounded to the nearest site.
    pub fn effective_fit_window(&self) -> usize {
        self.fit_window
            .unwrap_or_else(|| ((0.7 * self.steps as f64).round() as usize).max(2))
    }

    /// FNV-1a hash of the canonical JSON form; stamped into output headers
    /// so files can be traced back to their exact configuration.
    pub fn hash(&self) -> u64 {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in canonical.as_bytes() {
            h ^= *byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}
