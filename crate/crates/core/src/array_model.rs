//! Received-data synthesis for a uniform linear array.
//!
//! `y(t) = A(Φ)·x(t) + n(t)` with rectangular-pulse QPSK sources, an optional
//! fading channel and circularly symmetric white Gaussian noise.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::numerics::ComplexMatrix;
use crate::rng::{stream, StreamRole};
use crate::scenario::ScenarioConfig;

/// Free-space propagation speed in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub num_elements: usize,
    pub spacing_m: f64,
    pub carrier_freq_hz: f64,
}

impl Default for ArrayGeometry {
    /// 16 elements at half-wavelength spacing for a 2.4 GHz carrier.
    fn default() -> Self {
        Self::half_wavelength(16, 2.4e9)
    }
}

impl ArrayGeometry {
    pub fn half_wavelength(num_elements: usize, carrier_freq_hz: f64) -> Self {
        Self {
            num_elements,
            spacing_m: 0.5 * SPEED_OF_LIGHT / carrier_freq_hz,
            carrier_freq_hz,
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_elements < 2 {
            return Err(DoaError::Config(format!(
                "array needs at least 2 elements, got {}",
                self.num_elements
            )));
        }
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return Err(DoaError::Config(format!(
                "element spacing must be positive, got {} m",
                self.spacing_m
            )));
        }
        if !(self.carrier_freq_hz.is_finite() && self.carrier_freq_hz > 0.0) {
            return Err(DoaError::Config(format!(
                "carrier frequency must be positive, got {} Hz",
                self.carrier_freq_hz
            )));
        }
        Ok(())
    }

    /// φ = (2π/λ)·d·cos θ, θ measured from the array axis.
    pub fn electrical_phase(&self, theta_deg: f64) -> f64 {
        2.0 * PI / self.wavelength() * self.spacing_m * theta_deg.to_radians().cos()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub electrical_phase: f64,
}

/// `a(θ) = [1, e^{−jφ}, …, e^{−j(m−1)φ}]ᵀ`.
pub fn steering_vector(geometry: &ArrayGeometry, theta_deg: f64) -> Result<SteeringVector> {
    geometry.validate()?;
    if !(0.0..=180.0).contains(&theta_deg) {
        return Err(DoaError::Config(format!(
            "arrival angle must lie in [0°, 180°], got {theta_deg}°"
        )));
    }
    let phi = geometry.electrical_phase(theta_deg);
    Ok(SteeringVector {
        entries: steering_entries(geometry.num_elements, phi),
        electrical_phase: phi,
    })
}

pub(crate) fn steering_entries(m: usize, phi: f64) -> Vec<Complex64> {
    (0..m)
        .map(|k| Complex64::from_polar(1.0, -(k as f64) * phi))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRole {
    /// Signal of interest: counted as truth for the cyclic estimator.
    #[default]
    Soi,
    Interferer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpskSource {
    pub bit_rate_bps: f64,
    pub samples_per_bit: usize,
    pub doa_deg: f64,
    /// Average received power per element (linear).
    pub power: f64,
    pub role: SourceRole,
}

impl QpskSource {
    /// Derives `samples_per_bit` from the common sample rate; the ratio must be
    /// a whole number.
    pub fn new(
        bit_rate_bps: f64,
        sample_rate_hz: f64,
        doa_deg: f64,
        power: f64,
        role: SourceRole,
    ) -> Result<Self> {
        if !(bit_rate_bps.is_finite() && bit_rate_bps > 0.0) {
            return Err(DoaError::Config(format!("bit rate must be positive, got {bit_rate_bps}")));
        }
        let ratio = sample_rate_hz / bit_rate_bps;
        let spb = ratio.round();
        if !ratio.is_finite() || spb < 1.0 || (ratio - spb).abs() > 1e-9 * ratio {
            return Err(DoaError::Config(format!(
                "sample rate {sample_rate_hz} Hz is not a whole multiple of bit rate {bit_rate_bps} b/s"
            )));
        }
        let src = Self {
            bit_rate_bps,
            samples_per_bit: spb as usize,
            doa_deg,
            power,
            role,
        };
        src.validate()?;
        Ok(src)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_bit < 1 {
            return Err(DoaError::Config("samples_per_bit must be at least 1".into()));
        }
        if !(0.0..=180.0).contains(&self.doa_deg) {
            return Err(DoaError::Config(format!(
                "source DOA must lie in [0°, 180°], got {}°",
                self.doa_deg
            )));
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(DoaError::Config(format!("source power must be positive, got {}", self.power)));
        }
        Ok(())
    }

    pub fn samples_per_symbol(&self) -> usize {
        2 * self.samples_per_bit
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.bit_rate_bps * self.samples_per_bit as f64
    }

    pub fn symbol_rate_hz(&self) -> f64 {
        self.bit_rate_bps / 2.0
    }
}

/// Gray map: 00→(1+j)/√2, 01→(−1+j)/√2, 11→(−1−j)/√2, 10→(1−j)/√2.
pub fn gray_symbol(first: u8, second: u8) -> Complex64 {
    let i = if second == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let q = if first == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(i, q)
}

/// Rectangular-pulse QPSK from an explicit bit sequence, which must cover
/// `num_samples` (two bits per symbol).
pub fn modulate_bits(bits: &[u8], samples_per_bit: usize, power: f64, num_samples: usize) -> Result<Vec<Complex64>> {
    let sps = 2 * samples_per_bit;
    let needed = num_samples.div_ceil(sps) * 2;
    if bits.len() < needed {
        return Err(DoaError::Contract(format!(
            "{} bits cannot fill {num_samples} samples ({needed} needed)",
            bits.len()
        )));
    }
    let amp = power.sqrt();
    Ok((0..num_samples)
        .map(|n| {
            let s = n / sps;
            gray_symbol(bits[2 * s], bits[2 * s + 1]) * amp
        })
        .collect())
}

pub fn qpsk_waveform<R: Rng>(source: &QpskSource, num_samples: usize, rng: &mut R) -> Vec<Complex64> {
    let sps = source.samples_per_symbol();
    let amp = source.power.sqrt();
    let num_symbols = num_samples.div_ceil(sps);
    let symbols: Vec<Complex64> = (0..num_symbols)
        .map(|_| {
            let b: u8 = rng.random_range(0..4);
            gray_symbol(b >> 1, b & 1) * amp
        })
        .collect();
    (0..num_samples).map(|n| symbols[n / sps]).collect()
}

/// Seeded QPSK waveform: one symbol per dibit, each held `2·samples_per_bit` samples.
pub fn generate_qpsk(source: &QpskSource, num_samples: usize, rng_seed: u64) -> Result<Vec<Complex64>> {
    source.validate()?;
    if num_samples == 0 {
        return Err(DoaError::Contract("num_samples must be at least 1".into()));
    }
    Ok(qpsk_waveform(source, num_samples, &mut stream(rng_seed, StreamRole::SourceBits(0))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    #[default]
    NoFading,
    /// One complex gain per user, steering structure kept.
    CoherentWavefront,
    /// Independent complex gain per user and element; no steering structure.
    NonCoherentElementFading,
}

/// Per-trial fading draw. Gains are unit-variance circular complex Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelRealization {
    NoFading,
    /// `gains[k]` multiplies user k's steering column.
    CoherentWavefront { gains: Vec<Complex64> },
    /// `gains[k][l]` replaces element l of user k's steering column.
    NonCoherentElementFading { gains: Vec<Vec<Complex64>> },
}

impl ChannelRealization {
    pub fn draw<R: Rng>(kind: ChannelKind, num_users: usize, num_elements: usize, rng: &mut R) -> Self {
        match kind {
            ChannelKind::NoFading => Self::NoFading,
            ChannelKind::CoherentWavefront => Self::CoherentWavefront {
                gains: (0..num_users).map(|_| complex_gaussian(rng, 1.0)).collect(),
            },
            ChannelKind::NonCoherentElementFading => Self::NonCoherentElementFading {
                gains: (0..num_users)
                    .map(|_| (0..num_elements).map(|_| complex_gaussian(rng, 1.0)).collect())
                    .collect(),
            },
        }
    }

    /// Effective array response of user `k`.
    pub fn response(&self, k: usize, steering: &[Complex64]) -> Vec<Complex64> {
        match self {
            Self::NoFading => steering.to_vec(),
            Self::CoherentWavefront { gains } => steering.iter().map(|a| a * gains[k]).collect(),
            Self::NonCoherentElementFading { gains } => gains[k].clone(),
        }
    }
}

/// Circularly symmetric complex Gaussian with E|z|² = `variance`.
pub fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Per-element SNR of the reference source; `+inf` turns noise off.
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64) -> Self {
        Self { snr_db }
    }

    pub fn noiseless() -> Self {
        Self { snr_db: f64::INFINITY }
    }

    /// σ = P_ref · 10^(−SNR/10).
    pub fn noise_power(&self, reference_power: f64) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            reference_power * 10f64.powf(-self.snr_db / 10.0)
        }
    }
}

/// m × N complex baseband samples; row `l` is element `l`'s time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: ComplexMatrix,
}

impl SnapshotMatrix {
    pub fn from_matrix(data: ComplexMatrix) -> Self {
        Self { data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(DoaError::Contract("element rows have unequal lengths".into()));
        }
        Ok(Self {
            data: ComplexMatrix::new(m, n, rows.into_iter().flatten().collect())?,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.data.rows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.data.cols()
    }

    pub fn element(&self, l: usize) -> &[Complex64] {
        self.data.row(l)
    }

    pub fn snapshot(&self, t: usize) -> Vec<Complex64> {
        self.data.column(t)
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.data
    }

    /// Applies `f` to every element row independently.
    pub fn map_rows(&self, mut f: impl FnMut(&[Complex64]) -> Result<Vec<Complex64>>) -> Result<Self> {
        let rows = (0..self.num_elements())
            .map(|l| f(self.element(l)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

/// Reference power for the SNR definition: first signal of interest, else the
/// first source, else 1.
pub fn reference_power(sources: &[QpskSource]) -> f64 {
    sources
        .iter()
        .find(|s| s.role == SourceRole::Soi)
        .or_else(|| sources.first())
        .map_or(1.0, |s| s.power)
}

pub fn draw_channel(scenario: &ScenarioConfig, rng_seed: u64) -> ChannelRealization {
    ChannelRealization::draw(
        scenario.channel,
        scenario.sources.len(),
        scenario.geometry.num_elements,
        &mut stream(rng_seed, StreamRole::Fading),
    )
}

pub fn source_waveform(scenario: &ScenarioConfig, k: usize, rng_seed: u64) -> Vec<Complex64> {
    qpsk_waveform(
        &scenario.sources[k],
        scenario.num_snapshots,
        &mut stream(rng_seed, StreamRole::SourceBits(k)),
    )
}

/// Builds one trial's received data. Depends only on the signal part of the
/// scenario (array, sources, channel, noise, snapshot count) and the seed, so
/// different estimators given the same seed see identical data.
pub fn synthesize_snapshots(scenario: &ScenarioConfig, rng_seed: u64) -> Result<SnapshotMatrix> {
    scenario.validate_signal_model()?;
    let m = scenario.geometry.num_elements;
    let n = scenario.num_snapshots;
    let channel = draw_channel(scenario, rng_seed);
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; m];

    for (k, src) in scenario.sources.iter().enumerate() {
        let a = steering_vector(&scenario.geometry, src.doa_deg)?;
        let response = channel.response(k, &a.entries);
        let x = source_waveform(scenario, k, rng_seed);
        for (row, &gain) in rows.iter_mut().zip(&response) {
            for (y, &s) in row.iter_mut().zip(&x) {
                *y += gain * s;
            }
        }
    }

    let sigma = scenario.noise.noise_power(reference_power(&scenario.sources));
    if sigma > 0.0 {
        let mut rng = stream(rng_seed, StreamRole::Noise);
        for row in rows.iter_mut() {
            for y in row.iter_mut() {
                *y += complex_gaussian(&mut rng, sigma);
            }
        }
    }
    SnapshotMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::svd;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn default_geometry_matches_reference_setup() {
        let g = ArrayGeometry::default();
        assert_eq!(g.num_elements, 16);
        assert!((g.wavelength() - 0.125).abs() < 1e-15);
        assert!((g.spacing_m - 0.0625).abs() < 1e-15);
        assert!(g.validate().is_ok());
    }

    #[test]
    fn invalid_geometry_rejected() {
        let mut g = ArrayGeometry::default();
        g.num_elements = 1;
        assert!(matches!(steering_vector(&g, 10.0), Err(DoaError::Config(_))));
        let mut g = ArrayGeometry::default();
        g.spacing_m = 0.0;
        assert!(g.validate().is_err());
        assert!(steering_vector(&ArrayGeometry::default(), 181.0).is_err());
    }

    #[test]
    fn broadside_and_endfire() {
        let g = ArrayGeometry::half_wavelength(4, 2.4e9);
        let a = steering_vector(&g, 90.0).unwrap();
        assert!(a.entries.iter().all(|&e| close(e, Complex64::new(1.0, 0.0))));
        let g = ArrayGeometry::half_wavelength(2, 2.4e9);
        let a = steering_vector(&g, 0.0).unwrap();
        assert!((a.electrical_phase - PI).abs() < 1e-12);
        assert!(close(a.entries[0], Complex64::new(1.0, 0.0)));
        assert!(close(a.entries[1], Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn sixty_degrees_elementwise() {
        let g = ArrayGeometry::default();
        let a = steering_vector(&g, 60.0).unwrap();
        assert!((a.electrical_phase - PI / 2.0).abs() < 1e-12);
        assert_eq!(a.entries.len(), 16);
        for (k, e) in a.entries.iter().enumerate() {
            // e^{−jkπ/2} cycles through 1, −j, −1, j
            let expected = [
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
            ][k % 4];
            assert!((e - expected).norm() < 1e-12, "k={k}");
            assert!((e.norm() - 1.0).abs() < 1e-15);
        }
        assert_eq!(a.entries[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn vandermonde_rank() {
        let g = ArrayGeometry::default();
        let angles = [3.0, 20.0, 45.5, 90.0, 120.0, 177.0];
        let cols: Vec<Vec<Complex64>> = angles
            .iter()
            .map(|&t| steering_vector(&g, t).unwrap().entries)
            .collect();
        let s = svd(&ComplexMatrix::from_columns(&cols).unwrap()).unwrap();
        let sv = &s.singular_values;
        assert!(sv[angles.len() - 1] > 1e-8 * sv[0]);
    }

    #[test]
    fn gray_map_table() {
        let r = FRAC_1_SQRT_2;
        assert_eq!(gray_symbol(0, 0), Complex64::new(r, r));
        assert_eq!(gray_symbol(0, 1), Complex64::new(-r, r));
        assert_eq!(gray_symbol(1, 1), Complex64::new(-r, -r));
        assert_eq!(gray_symbol(1, 0), Complex64::new(r, -r));
    }

    #[test]
    fn single_symbol_waveform() {
        let w = modulate_bits(&[0, 0], 10, 1.0, 20).unwrap();
        assert_eq!(w.len(), 20);
        assert!(w.iter().all(|&s| s == Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)));
        assert!(modulate_bits(&[0, 0], 10, 1.0, 21).is_err());
    }

    #[test]
    fn qpsk_power_and_determinism() {
        let src = QpskSource::new(2e6, 20e6, 20.0, 4.0, SourceRole::Soi).unwrap();
        assert_eq!(src.samples_per_bit, 10);
        let w = generate_qpsk(&src, 100_000, 42).unwrap();
        let p = w.iter().map(|s| s.norm_sqr()).sum::<f64>() / w.len() as f64;
        assert!((p - 4.0).abs() <= 0.04);
        assert_eq!(w, generate_qpsk(&src, 100_000, 42).unwrap());
        // held for 2 × samples_per_bit
        for chunk in w.chunks(20) {
            assert!(chunk.iter().all(|&s| s == chunk[0]));
        }
        assert!(generate_qpsk(&src, 0, 1).is_err());
    }

    #[test]
    fn source_rate_must_divide_sample_rate() {
        assert!(QpskSource::new(3e6, 20e6, 10.0, 1.0, SourceRole::Soi).is_err());
        assert!(QpskSource::new(1e6, 20e6, 10.0, -1.0, SourceRole::Soi).is_err());
    }

    #[test]
    fn noise_power_from_snr() {
        assert_eq!(NoiseSpec::noiseless().noise_power(2.0), 0.0);
        assert!((NoiseSpec::new(10.0).noise_power(2.0) - 0.2).abs() < 1e-15);
        assert!((NoiseSpec::new(-10.0).noise_power(1.0) - 10.0).abs() < 1e-12);
    }
}
