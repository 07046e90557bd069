//! TOML scenario files. Every physical quantity carries its unit in the key
//! name; unknown keys are rejected and omitted keys take the bundled
//! `paper_default` values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array_model::{ArrayGeometry, ChannelKind, NoiseSpec, QpskSource, SourceRole};
use crate::error::{DoaError, Result};
use crate::estimators::AngleGrid;
use crate::preprocess::PreprocessConfig;
use crate::scenario::{CyclicSettings, EstimatorKind, Method, MetricSettings, ScenarioConfig};

/// Name that resolves to the bundled scenario when no such file exists.
pub const PAPER_DEFAULT_NAME: &str = "paper_default";

pub const PAPER_DEFAULT_TOML: &str = include_str!("../../scenarios/paper_default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub num_elements: usize,
    pub carrier_freq_hz: f64,
    /// Half a wavelength when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            num_elements: 16,
            carrier_freq_hz: 2.4e9,
            spacing_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub bit_rate_bps: f64,
    pub doa_deg: f64,
    #[serde(default = "unit_power")]
    pub power: f64,
    #[serde(default)]
    pub role: SourceRole,
}

fn unit_power() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub num_runs: usize,
    pub base_seed: u64,
    pub num_snapshots: usize,
    pub sample_rate_hz: f64,
    pub channel: ChannelKind,
    /// `inf` disables noise.
    pub snr_db: f64,
    pub snr_sweep_db: Vec<f64>,
    pub estimator: EstimatorKind,
    pub preprocessing: bool,
    pub array: ArraySection,
    pub sources: Vec<SourceSection>,
    pub comparisons: Vec<Method>,
    pub cyclic: CyclicSettings,
    pub preprocess: PreprocessConfig,
    pub grid: AngleGrid,
    pub metrics: MetricSettings,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self::from_config(&ScenarioConfig::paper_default())
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| DoaError::Config(e.to_string()))
    }

    /// File form of a config with every defaulted value spelled out.
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            num_runs: cfg.num_runs,
            base_seed: cfg.base_seed,
            num_snapshots: cfg.num_snapshots,
            sample_rate_hz: cfg.sample_rate_hz,
            channel: cfg.channel,
            snr_db: cfg.noise.snr_db,
            snr_sweep_db: cfg.snr_sweep_db.clone(),
            estimator: cfg.method.estimator,
            preprocessing: cfg.method.preprocessing,
            array: ArraySection {
                num_elements: cfg.geometry.num_elements,
                carrier_freq_hz: cfg.geometry.carrier_freq_hz,
                spacing_m: Some(cfg.geometry.spacing_m),
            },
            sources: cfg
                .sources
                .iter()
                .map(|s| SourceSection {
                    bit_rate_bps: s.bit_rate_bps,
                    doa_deg: s.doa_deg,
                    power: s.power,
                    role: s.role,
                })
                .collect(),
            comparisons: cfg.comparisons.clone(),
            cyclic: cfg.cyclic,
            preprocess: cfg.preprocess,
            grid: cfg.grid,
            metrics: cfg.metrics,
        }
    }

    /// Builds and fully validates the config.
    pub fn to_config(&self) -> Result<ScenarioConfig> {
        let a = &self.array;
        let mut geometry = ArrayGeometry::half_wavelength(a.num_elements, a.carrier_freq_hz);
        if let Some(d) = a.spacing_m {
            geometry.spacing_m = d;
        }
        let sources = self
            .sources
            .iter()
            .enumerate()
            .map(|(k, s)| {
                QpskSource::new(s.bit_rate_bps, self.sample_rate_hz, s.doa_deg, s.power, s.role)
                    .map_err(|e| DoaError::Config(format!("sources[{k}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = ScenarioConfig {
            geometry,
            sample_rate_hz: self.sample_rate_hz,
            sources,
            channel: self.channel,
            noise: NoiseSpec::new(self.snr_db),
            snr_sweep_db: self.snr_sweep_db.clone(),
            method: Method::new(self.estimator, self.preprocessing),
            comparisons: self.comparisons.clone(),
            cyclic: self.cyclic,
            preprocess: self.preprocess,
            num_snapshots: self.num_snapshots,
            grid: self.grid,
            metrics: self.metrics,
            num_runs: self.num_runs,
            base_seed: self.base_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }
}

/// Reads a scenario from `arg`, falling back to the bundled scenario when
/// `arg` is `paper_default` and no file of that name exists.
pub fn load_scenario_file(arg: &str) -> std::result::Result<ScenarioFile, LoadError> {
    let path = Path::new(arg);
    let text = if arg == PAPER_DEFAULT_NAME && !path.exists() {
        PAPER_DEFAULT_TOML.to_string()
    } else {
        std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("cannot read {arg}: {e}")))?
    };
    ScenarioFile::parse(&text).map_err(|e| LoadError::Parse(format!("{arg}: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadError {
    Io(String),
    Parse(String),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(m) | Self::Parse(m) => f.write_str(m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_equals_builtin_default() {
        let cfg = ScenarioFile::parse(PAPER_DEFAULT_TOML).unwrap().to_config().unwrap();
        assert_eq!(cfg, ScenarioConfig::paper_default());
    }

    #[test]
    fn empty_file_takes_defaults() {
        let cfg = ScenarioFile::parse("").unwrap().to_config().unwrap();
        assert_eq!(cfg, ScenarioConfig::paper_default());
    }

    #[test]
    fn normalized_echo_round_trips() {
        let file = ScenarioFile::default();
        let again = ScenarioFile::parse(&file.to_toml()).unwrap();
        assert_eq!(again.to_config().unwrap(), ScenarioConfig::paper_default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioFile::parse("bogus = 1").is_err());
        assert!(ScenarioFile::parse("[cyclic]\nlag = 2").is_err());
        assert!(ScenarioFile::parse("[[sources]]\nbit_rate_bps = 2e6\ndoa_deg = 3\nfoo = 1").is_err());
    }

    #[test]
    fn parse_error_mentions_line() {
        let err = ScenarioFile::parse("num_runs = 3\nnum_snapshots = \"x\"").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn infinite_snr_accepted() {
        let cfg = ScenarioFile::parse("snr_db = inf").unwrap().to_config().unwrap();
        assert_eq!(cfg.noise.snr_db, f64::INFINITY);
    }
}
