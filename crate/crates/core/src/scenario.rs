//! Complete experiment description shared by the Monte Carlo runner and CLI.

use serde::{Deserialize, Serialize};

use crate::array_model::{ArrayGeometry, ChannelKind, NoiseSpec, QpskSource, SourceRole};
use crate::error::{DoaError, Result};
use crate::estimators::{AngleGrid, CyclicVariant};
use crate::preprocess::{ObwReference, PreprocessConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[default]
    Music,
    CyclicMusic,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Music => "music",
            Self::CyclicMusic => "cyclic_music",
        }
    }
}

/// One estimator with the pre-processor on or off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Method {
    pub estimator: EstimatorKind,
    pub preprocessing: bool,
}

impl Method {
    pub fn new(estimator: EstimatorKind, preprocessing: bool) -> Self {
        Self { estimator, preprocessing }
    }

    /// Every estimator × pre-processing combination.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(4);
        for estimator in [EstimatorKind::Music, EstimatorKind::CyclicMusic] {
            for preprocessing in [false, true] {
                out.push(Self::new(estimator, preprocessing));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CyclicSettings {
    pub alpha_hz: f64,
    pub lag_samples: usize,
    pub variant: CyclicVariant,
    /// Number of sources cyclostationary at `alpha_hz`.
    pub n_cyclic_sources: usize,
}

impl Default for CyclicSettings {
    fn default() -> Self {
        Self {
            alpha_hz: 4.0e6,
            lag_samples: 2,
            variant: CyclicVariant::Autocorrelation,
            n_cyclic_sources: 1,
        }
    }
}

/// Angular windows used by peak picking and the metrics, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSettings {
    /// Minimum separation between reported peaks.
    pub peak_guard_deg: f64,
    /// An estimate within this distance of its truth counts as resolved.
    pub match_tolerance_deg: f64,
    /// Error charged to a truth left without an estimate.
    pub miss_penalty_deg: f64,
    /// Half-width of the window around each truth excluded from spurious peaks.
    pub spurious_guard_deg: f64,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self {
            peak_guard_deg: 2.0,
            match_tolerance_deg: 1.0,
            miss_penalty_deg: 2.0,
            spurious_guard_deg: 2.0,
        }
    }
}

impl MetricSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("peak_guard_deg", self.peak_guard_deg),
            ("match_tolerance_deg", self.match_tolerance_deg),
            ("miss_penalty_deg", self.miss_penalty_deg),
            ("spurious_guard_deg", self.spurious_guard_deg),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DoaError::Config(format!("metrics.{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: ArrayGeometry,
    pub sample_rate_hz: f64,
    pub sources: Vec<QpskSource>,
    pub channel: ChannelKind,
    /// SNR of a single trial.
    pub noise: NoiseSpec,
    /// SNR points of a sweep; empty means just `noise`.
    pub snr_sweep_db: Vec<f64>,
    /// Method of a single trial.
    pub method: Method,
    /// Methods compared in a sweep; empty means just `method`.
    pub comparisons: Vec<Method>,
    pub cyclic: CyclicSettings,
    pub preprocess: PreprocessConfig,
    pub num_snapshots: usize,
    pub grid: AngleGrid,
    pub metrics: MetricSettings,
    pub num_runs: usize,
    pub base_seed: u64,
}

impl ScenarioConfig {
    /// 16-element half-wavelength ULA at 2.4 GHz, 20 MHz sampling, a 2 Mb/s
    /// signal of interest at 20° and a 1 Mb/s interferer at 5°, 10 dB SNR,
    /// 1000 snapshots and 1000 runs per point.
    pub fn paper_default() -> Self {
        let fs = 20.0e6;
        let sources = vec![
            QpskSource::new(2.0e6, fs, 20.0, 1.0, SourceRole::Soi).expect("valid default source"),
            QpskSource::new(1.0e6, fs, 5.0, 1.0, SourceRole::Interferer).expect("valid default source"),
        ];
        Self {
            geometry: ArrayGeometry::half_wavelength(16, 2.4e9),
            sample_rate_hz: fs,
            sources,
            channel: ChannelKind::NoFading,
            noise: NoiseSpec::new(10.0),
            snr_sweep_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            method: Method::new(EstimatorKind::Music, false),
            comparisons: Method::all(),
            cyclic: CyclicSettings::default(),
            preprocess: PreprocessConfig::default(),
            num_snapshots: 1000,
            grid: AngleGrid::default(),
            metrics: MetricSettings::default(),
            num_runs: 1000,
            base_seed: 1,
        }
    }

    pub fn with_snr(&self, snr_db: f64) -> Self {
        Self {
            noise: NoiseSpec::new(snr_db),
            ..self.clone()
        }
    }

    pub fn with_method(&self, method: Method) -> Self {
        Self { method, ..self.clone() }
    }

    /// SNR points a sweep visits.
    pub fn sweep_points(&self) -> Vec<f64> {
        if self.snr_sweep_db.is_empty() {
            vec![self.noise.snr_db]
        } else {
            self.snr_sweep_db.clone()
        }
    }

    /// Methods a sweep compares.
    pub fn sweep_methods(&self) -> Vec<Method> {
        if self.comparisons.is_empty() {
            vec![self.method]
        } else {
            self.comparisons.clone()
        }
    }

    /// Checks what synthesis needs: geometry, per-source validity, distinct
    /// DOAs, fewer sources than elements.
    pub fn validate_signal_model(&self) -> Result<()> {
        self.geometry.validate()?;
        if self.num_snapshots == 0 {
            return Err(DoaError::Config("num_snapshots must be at least 1".into()));
        }
        if self.noise.snr_db.is_nan() || self.noise.snr_db == f64::NEG_INFINITY {
            return Err(DoaError::Config(format!("SNR must be a number or +inf, got {}", self.noise.snr_db)));
        }
        for (k, src) in self.sources.iter().enumerate() {
            src.validate()
                .map_err(|e| DoaError::Config(format!("sources[{k}]: {}", strip_kind(&e))))?;
            if (src.sample_rate_hz() - self.sample_rate_hz).abs() > 1e-9 * self.sample_rate_hz {
                return Err(DoaError::Config(format!(
                    "sources[{k}]: {} samples/bit at {} b/s does not match the {} Hz sample rate",
                    src.samples_per_bit, src.bit_rate_bps, self.sample_rate_hz
                )));
            }
        }
        for (i, a) in self.sources.iter().enumerate() {
            for b in &self.sources[i + 1..] {
                if a.doa_deg == b.doa_deg {
                    return Err(DoaError::Config(format!("two sources share the DOA {}°", a.doa_deg)));
                }
            }
        }
        let m = self.geometry.num_elements;
        if self.sources.len() >= m {
            return Err(DoaError::ModelViolation(format!(
                "{} sources need more than {m} array elements (n < m)",
                self.sources.len()
            )));
        }
        Ok(())
    }

    /// Full validation of every invariant the runner relies on.
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(DoaError::Config(format!("sample_rate_hz must be positive, got {}", self.sample_rate_hz)));
        }
        if self.sources.is_empty() {
            return Err(DoaError::Config("at least one source is required".into()));
        }
        self.validate_signal_model()?;
        if self.num_runs == 0 {
            return Err(DoaError::Config("num_runs must be at least 1".into()));
        }
        if let Some(bad) = self.snr_sweep_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(DoaError::Config(format!("SNR sweep point must be a number or +inf, got {bad}")));
        }
        self.grid.validate()?;
        self.metrics.validate()?;
        self.preprocess.validate()?;
        if let ObwReference::Element(l) = self.preprocess.reference {
            if l >= self.geometry.num_elements {
                return Err(DoaError::Config(format!(
                    "OBW reference element {l} does not exist ({} elements)",
                    self.geometry.num_elements
                )));
            }
        }
        if self.num_snapshots < 2 {
            return Err(DoaError::Config("num_snapshots must be at least 2".into()));
        }

        let uses_cyclic = self
            .sweep_methods()
            .iter()
            .chain(std::iter::once(&self.method))
            .any(|m| m.estimator == EstimatorKind::CyclicMusic);
        if uses_cyclic {
            self.validate_cyclic()?;
        }
        Ok(())
    }

    fn validate_cyclic(&self) -> Result<()> {
        let c = &self.cyclic;
        if !c.lag_samples.is_multiple_of(2) {
            return Err(DoaError::Config(format!("cyclic.lag_samples: lag must be even, got {}", c.lag_samples)));
        }
        if c.lag_samples >= self.num_snapshots {
            return Err(DoaError::Config(format!(
                "cyclic.lag_samples {} leaves no products in {} snapshots",
                c.lag_samples, self.num_snapshots
            )));
        }
        if !c.alpha_hz.is_finite() {
            return Err(DoaError::Config("cyclic.alpha_hz must be finite".into()));
        }
        let soi = self.cyclic_truth().len();
        if c.n_cyclic_sources == 0 || c.n_cyclic_sources > soi {
            return Err(DoaError::ModelViolation(format!(
                "cyclic.n_cyclic_sources must lie in 1..={soi} (sources marked soi), got {}",
                c.n_cyclic_sources
            )));
        }
        if c.n_cyclic_sources >= self.geometry.num_elements {
            return Err(DoaError::ModelViolation(format!(
                "{} cyclic sources need more than {} array elements",
                c.n_cyclic_sources, self.geometry.num_elements
            )));
        }
        Ok(())
    }

    /// DOAs of the sources marked as signals of interest.
    pub fn cyclic_truth(&self) -> Vec<f64> {
        self.sources
            .iter()
            .filter(|s| s.role == SourceRole::Soi)
            .map(|s| s.doa_deg)
            .collect()
    }

    /// DOAs the given estimator is expected to find.
    pub fn truth(&self, estimator: EstimatorKind) -> Vec<f64> {
        match estimator {
            EstimatorKind::Music => self.sources.iter().map(|s| s.doa_deg).collect(),
            EstimatorKind::CyclicMusic => self.cyclic_truth(),
        }
    }

    /// Number of peaks the estimator extracts.
    pub fn num_peaks(&self, estimator: EstimatorKind) -> usize {
        match estimator {
            EstimatorKind::Music => self.sources.len(),
            EstimatorKind::CyclicMusic => self.cyclic.n_cyclic_sources,
        }
    }
}

fn strip_kind(e: &DoaError) -> String {
    match e {
        DoaError::Config(s) | DoaError::ModelViolation(s) | DoaError::Contract(s) | DoaError::Degenerate(s) => s.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_default_is_valid() {
        let s = ScenarioConfig::paper_default();
        s.validate().unwrap();
        assert_eq!(s.geometry.num_elements, 16);
        assert_eq!(s.sources[0].samples_per_bit, 10);
        assert_eq!(s.sources[1].samples_per_bit, 20);
        assert_eq!(s.truth(EstimatorKind::Music), vec![20.0, 5.0]);
        assert_eq!(s.truth(EstimatorKind::CyclicMusic), vec![20.0]);
        assert_eq!(s.sweep_methods().len(), 4);
    }

    #[test]
    fn too_many_sources_is_model_violation() {
        let mut s = ScenarioConfig::paper_default();
        s.geometry = ArrayGeometry::half_wavelength(2, 2.4e9);
        assert!(matches!(s.validate(), Err(DoaError::ModelViolation(_))));
    }

    #[test]
    fn odd_lag_rejected() {
        let mut s = ScenarioConfig::paper_default();
        s.cyclic.lag_samples = 3;
        let err = s.validate().unwrap_err();
        assert!(err.to_string().contains("lag must be even"));
    }

    #[test]
    fn lag_ignored_without_cyclic_method() {
        let mut s = ScenarioConfig::paper_default();
        s.cyclic.lag_samples = 3;
        s.comparisons = vec![Method::new(EstimatorKind::Music, true)];
        s.validate().unwrap();
    }

    #[test]
    fn cyclic_count_bounded_by_soi_sources() {
        let mut s = ScenarioConfig::paper_default();
        s.cyclic.n_cyclic_sources = 2;
        assert!(matches!(s.validate(), Err(DoaError::ModelViolation(_))));
    }

    #[test]
    fn misc_invariants() {
        let base = ScenarioConfig::paper_default();
        let mut s = base.clone();
        s.sources.clear();
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.num_runs = 0;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.sources[1].doa_deg = 20.0;
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.preprocess.beta = 1.0;
        assert!(s.validate().is_err());
        let mut s = base;
        s.sample_rate_hz = 10.0e6;
        assert!(s.validate().is_err());
    }
}
