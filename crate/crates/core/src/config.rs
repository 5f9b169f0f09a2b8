//! The run configuration file.
//!
//! A single TOML document. `[exposure_response]` and `[scenario]` are
//! required; every other section falls back to documented defaults, which
//! are written out in full by [`RunConfig::to_toml`] so that a run can be
//! reproduced from its echoed configuration. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{RiskQuery, SimulationInputs};
use crate::er_model::ErFunctionSpec;
use crate::population::{
    load_ozone_series, zero_ozone_scenario, ActivityTemplate, Demographics, OzoneSeries, Scenario, Season,
    SyntheticOzone,
};
use crate::variability::VariabilityConfig;

pub const DEFAULT_MASTER_SEED: u64 = 20_170_301;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{location}[{section}] {message}")]
    Invalid { section: &'static str, location: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub size: usize,
    pub age_min: u32,
    pub age_max: u32,
    pub bmi_median_at_age_min: f64,
    pub bmi_median_slope: f64,
    pub bmi_log_sd: f64,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        let d = Demographics::default();
        Self {
            size: 60_000,
            age_min: d.age_min,
            age_max: d.age_max,
            bmi_median_at_age_min: d.bmi_median_at_age_min,
            bmi_median_slope: d.bmi_median_slope,
            bmi_log_sd: d.bmi_log_sd,
        }
    }
}

impl PopulationConfig {
    pub fn demographics(&self) -> Demographics {
        Demographics {
            age_min: self.age_min,
            age_max: self.age_max,
            bmi_median_at_age_min: self.bmi_median_at_age_min,
            bmi_median_slope: self.bmi_median_slope,
            bmi_log_sd: self.bmi_log_sd,
        }
    }
}

/// Where hourly ozone comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Runs the response function with `beta3 = 0`.
    #[serde(default)]
    pub zero_ozone: bool,
    /// Hourly `timestamp,ppb` CSV, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ozone_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant_ppb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticOzone>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    pub exposure_response: ErFunctionSpec,
    #[serde(default)]
    pub variability: VariabilityConfig,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default = "default_season")]
    pub season: Season,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub risk: RiskQuery,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub activity: ActivityTemplate,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

fn default_season() -> Season {
    Season::ozone_season(2017)
}

/// 1-based line of the first `key = ...` assignment in `text`, if any.
fn locate(text: &str, key: &str) -> String {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| format!("line {}: ", i + 1))
        .unwrap_or_default()
}

fn invalid(text: &str, section: &'static str, key: Option<&str>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        section,
        location: key.map(|k| locate(text, k)).unwrap_or_default(),
        message: message.to_string(),
    }
}

/// Field named at the start of a validation message such as
/// `bound_nu1 must be >= 0`.
fn leading_field(message: &str) -> Option<&str> {
    let word = message.split_whitespace().next()?;
    word.chars().all(|c| c.is_ascii_alphanumeric() || c == '_').then_some(word)
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.base_dir = base_dir.into();
        config.validate_with_source(text)?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with_source("")
    }

    fn validate_with_source(&self, text: &str) -> Result<(), ConfigError> {
        self.exposure_response.validate().map_err(|e| {
            let msg = e.to_string();
            let key = msg.split(": ").nth(1).and_then(leading_field).map(str::to_string);
            invalid(text, "exposure_response", key.as_deref(), msg)
        })?;
        self.variability.validate().map_err(|e| {
            let msg = e.to_string();
            let key = msg.split(": ").nth(1).and_then(leading_field).map(str::to_string);
            invalid(text, "variability", key.as_deref(), msg)
        })?;
        if self.population.size == 0 {
            return Err(invalid(text, "population", Some("size"), "size must be > 0"));
        }
        self.population
            .demographics()
            .validate()
            .map_err(|e| invalid(text, "population", None, e))?;
        self.activity.validate().map_err(|e| invalid(text, "activity", None, e))?;
        self.risk.validate().map_err(|e| invalid(text, "risk", None, e))?;
        let sources = [self.scenario.ozone_file.is_some(), self.scenario.constant_ppb.is_some(), self.scenario.synthetic.is_some()]
            .iter()
            .filter(|s| **s)
            .count();
        if sources > 1 {
            return Err(invalid(text, "scenario", None, "give at most one of ozone_file, constant_ppb, synthetic"));
        }
        if sources == 0 && !self.scenario.zero_ozone {
            return Err(invalid(text, "scenario", None, "no ozone source: set zero_ozone = true or give ozone_file, constant_ppb or [scenario.synthetic]"));
        }
        if let Some(c) = self.scenario.constant_ppb {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(invalid(text, "scenario", Some("constant_ppb"), format!("constant_ppb must be >= 0, got {c}")));
            }
        }
        Ok(())
    }

    pub fn ozone_path(&self) -> Option<PathBuf> {
        self.scenario.ozone_file.as_ref().map(|p| if p.is_absolute() { p.clone() } else { self.base_dir.join(p) })
    }

    pub fn build_scenario(&self) -> Result<Scenario, ConfigError> {
        let season = self.season;
        let series = if let Some(path) = self.ozone_path() {
            Some(load_ozone_series(&path, season).map_err(|e| invalid("", "scenario", None, format!("{}: {e}", path.display())))?)
        } else if let Some(c) = self.scenario.constant_ppb {
            Some(OzoneSeries::constant(season, c).map_err(|e| invalid("", "scenario", None, e))?)
        } else if let Some(params) = &self.scenario.synthetic {
            Some(OzoneSeries::synthetic(season, params, self.master_seed).map_err(|e| invalid("", "scenario", None, e))?)
        } else {
            None
        };
        Ok(match (series, self.scenario.zero_ozone) {
            (Some(ozone), zero) => Scenario { ozone, beta3_zero: zero },
            (None, _) => zero_ozone_scenario(season),
        })
    }

    pub fn to_inputs(&self) -> Result<SimulationInputs, ConfigError> {
        Ok(SimulationInputs {
            er: self.exposure_response,
            variability: self.variability,
            demographics: self.population.demographics(),
            template: self.activity.clone(),
            season: self.season,
            scenario: self.build_scenario()?,
            population_size: self.population.size,
            master_seed: self.master_seed,
        })
    }

    /// The fully materialized configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    RunConfig::from_toml_str(&text, base).map_err(|e| match e {
        ConfigError::Parse(m) => ConfigError::Parse(format!("{}: {m}", path.display())),
        ConfigError::Invalid { section, location, message } => {
            ConfigError::Invalid { section, location: format!("{}: {location}", path.display()), message }
        }
        other => other,
    })
}
