//! Run configuration: built-in defaults, then a flat JSON file, then
//! command-line overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dynamics::Scheme;
use crate::optimize::Objective;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Field { field: &'static str, reason: String },
}

impl ConfigError {
    pub fn field(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Field {
            field,
            reason: reason.into(),
        }
    }
}

/// How η is chosen for each pass count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaMode {
    Optimize,
    Fixed(f64),
}

/// `"eta": "optimize"` or `"eta": 0.05`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum EtaSetting {
    Fixed(f64),
    Named(String),
}

/// Every field optional; used both for the file and for the overrides.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub alpha0: Option<f64>,
    pub reflectivity: Option<f64>,
    pub scheme: Option<String>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub objectives: Option<Vec<String>>,
    pub eta: Option<EtaSetting>,
    pub output_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub lossless: Option<bool>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: PartialConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            alpha0,
            reflectivity,
            scheme,
            n_min,
            n_max,
            objectives,
            eta,
            output_path,
            seed,
            lossless
        );
        self
    }
}

/// Validated run configuration. `None` in `reflectivity`, `scheme` and
/// `objectives` lets each figure use its own preset.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alpha0: f64,
    pub reflectivity: Option<f64>,
    pub scheme: Option<Scheme>,
    pub n_min: usize,
    pub n_max: usize,
    pub objectives: Option<Vec<Objective>>,
    pub eta_mode: EtaMode,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    pub lossless: bool,
}

pub const DEFAULT_ALPHA0: f64 = 25.0;
pub const DEFAULT_N_MAX: usize = 40;
pub const DEFAULT_SEED: u64 = 0x5eed;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha0: DEFAULT_ALPHA0,
            reflectivity: None,
            scheme: None,
            n_min: 1,
            n_max: DEFAULT_N_MAX,
            objectives: None,
            eta_mode: EtaMode::Optimize,
            output_path: None,
            seed: DEFAULT_SEED,
            lossless: false,
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with `partial`, validated.
    pub fn resolve(partial: &PartialConfig) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(a) = partial.alpha0 {
            cfg.alpha0 = a;
        }
        cfg.reflectivity = partial.reflectivity;
        if let Some(s) = &partial.scheme {
            cfg.scheme = Some(s.parse().map_err(|e| ConfigError::field("scheme", e))?);
        }
        if let Some(n) = partial.n_min {
            cfg.n_min = n;
        }
        if let Some(n) = partial.n_max {
            cfg.n_max = n;
        }
        if let Some(list) = &partial.objectives {
            let parsed = list
                .iter()
                .map(|o| o.parse::<Objective>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ConfigError::field("objectives", e))?;
            cfg.objectives = Some(parsed);
        }
        match &partial.eta {
            None => {}
            Some(EtaSetting::Fixed(v)) => cfg.eta_mode = EtaMode::Fixed(*v),
            Some(EtaSetting::Named(s)) if s == "optimize" => cfg.eta_mode = EtaMode::Optimize,
            Some(EtaSetting::Named(s)) => {
                return Err(ConfigError::field(
                    "eta",
                    format!("expected \"optimize\" or a number, got \"{s}\""),
                ))
            }
        }
        cfg.output_path = partial.output_path.clone();
        if let Some(s) = partial.seed {
            cfg.seed = s;
        }
        if let Some(l) = partial.lossless {
            cfg.lossless = l;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return Err(ConfigError::field(
                "alpha0",
                format!("{} must be positive", self.alpha0),
            ));
        }
        if let Some(r) = self.reflectivity {
            if !(0.0..1.0).contains(&r) {
                return Err(ConfigError::field(
                    "reflectivity",
                    format!("{r} not in [0, 1)"),
                ));
            }
        }
        if self.n_min == 0 {
            return Err(ConfigError::field("n_min", "must be at least 1"));
        }
        if self.n_min > self.n_max {
            return Err(ConfigError::field(
                "n_max",
                format!("{} is below n_min = {}", self.n_max, self.n_min),
            ));
        }
        if let Some(objs) = &self.objectives {
            if objs.is_empty() {
                return Err(ConfigError::field("objectives", "list is empty"));
            }
        }
        if let EtaMode::Fixed(eta) = self.eta_mode {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(ConfigError::field("eta", format!("{eta} not in (0, 1)")));
            }
            if self.lossless {
                return Err(ConfigError::field(
                    "eta",
                    "a fixed η has no meaning for lossless runs",
                ));
            }
        }
        Ok(())
    }

    pub fn pass_counts(&self) -> std::ops::RangeInclusive<usize> {
        self.n_min..=self.n_max
    }
}
