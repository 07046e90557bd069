//! Frequency-domain pre-processing ahead of the subspace estimators.
//!
//! Flow per trial: per-element wavelet soft-threshold denoising, power
//! spectrum of a reference channel, occupied-bandwidth (OBW) limits at
//! `1 − β` of total power, then a covariance built only from DFT bins
//! inside `[f_L, f_H]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_model::SnapshotMatrix;
use crate::error::{DoaError, Result};
use crate::estimators::CovarianceMatrix;
use crate::numerics::{dft, dwt_level1, idft, idwt_level1, ComplexMatrix, WaveletFamily};

/// MAD-to-σ factor for Gaussian noise.
const MAD_SCALE: f64 = 0.6745;

/// Power per DFT bin, bins sorted by ascending frequency (negative
/// frequencies below zero).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub bin_freqs_hz: Vec<f64>,
    pub powers: Vec<f64>,
}

impl PowerSpectrum {
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// DFT index for each position of the frequency-sorted bin list.
fn centered_order(len: usize) -> Vec<usize> {
    let first_negative = len.div_ceil(2);
    (first_negative..len).chain(0..first_negative).collect()
}

fn bin_freq(k: usize, len: usize, sample_rate_hz: f64) -> f64 {
    let signed = if k < len.div_ceil(2) { k as f64 } else { k as f64 - len as f64 };
    signed * sample_rate_hz / len as f64
}

/// `P_y(f_k) = |X[k]|²` with the unnormalized DFT, center-shifted.
pub fn power_spectrum(samples: &[Complex64], sample_rate_hz: f64) -> Result<PowerSpectrum> {
    let len = samples.len();
    if len < 2 {
        return Err(DoaError::Contract(format!("power spectrum needs at least 2 samples, got {len}")));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(DoaError::Contract("sample rate must be positive".into()));
    }
    let spectrum = dft(samples);
    let order = centered_order(len);
    Ok(PowerSpectrum {
        bin_freqs_hz: order.iter().map(|&k| bin_freq(k, len, sample_rate_hz)).collect(),
        powers: order.iter().map(|&k| spectrum[k].norm_sqr()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObwLimits {
    pub f_low_hz: f64,
    pub f_high_hz: f64,
    /// Positions of the edge bins in the sorted spectrum.
    pub low_bin: usize,
    pub high_bin: usize,
    /// Total excluded power fraction (0.01 for the 99% bandwidth).
    pub beta: f64,
}

/// Occupied-bandwidth limits.
///
/// With `P_rel = Σ P_y` and `ΔP = P_rel·β/2`, `f_L` is the first bin at which
/// the cumulative power from the low edge reaches `ΔP`, and `f_H` the first
/// bin at which the cumulative power from the high edge reaches `ΔP`.
pub fn obw_limits(spectrum: &PowerSpectrum, beta: f64) -> Result<ObwLimits> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(DoaError::Contract(format!("beta must lie in (0, 1), got {beta}")));
    }
    if spectrum.powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(DoaError::Contract("spectrum powers must be finite and non-negative".into()));
    }
    let total = spectrum.total_power();
    if !(total > 0.0) {
        return Err(DoaError::Contract("spectrum carries no power".into()));
    }
    let excluded = total * beta / 2.0;
    let first_reaching = |iter: &mut dyn Iterator<Item = (usize, &f64)>| {
        let mut cum = 0.0;
        for (i, p) in iter {
            cum += p;
            if cum >= excluded {
                return Some(i);
            }
        }
        None
    };
    let n = spectrum.len();
    let low_bin = first_reaching(&mut spectrum.powers.iter().enumerate()).unwrap_or(n - 1);
    let high_bin = first_reaching(&mut spectrum.powers.iter().enumerate().rev()).unwrap_or(0);
    // both edges inside one bin can only happen when that bin carries > 1 − β
    let (low_bin, high_bin) = if low_bin <= high_bin { (low_bin, high_bin) } else { (high_bin, low_bin) };
    Ok(ObwLimits {
        f_low_hz: spectrum.bin_freqs_hz[low_bin],
        f_high_hz: spectrum.bin_freqs_hz[high_bin],
        low_bin,
        high_bin,
        beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// σ̂·√(2 ln L).
    #[default]
    Universal,
    /// SURE threshold unless the coefficients look sparse, in which case the
    /// universal threshold.
    HeuristicSure,
    /// Fixed threshold in coefficient units.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    #[default]
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseConfig {
    pub wavelet: WaveletFamily,
    pub level: u32,
    pub threshold_rule: ThresholdRule,
    pub mode: ThresholdMode,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletFamily::Haar,
            level: 1,
            threshold_rule: ThresholdRule::Universal,
            mode: ThresholdMode::Soft,
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.level != 1 {
            return Err(DoaError::Config(format!(
                "only single-level decomposition is supported, got level {}",
                self.level
            )));
        }
        if let ThresholdRule::Fixed(t) = self.threshold_rule {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(DoaError::Config(format!("fixed threshold must be >= 0, got {t}")));
            }
        }
        Ok(())
    }
}

pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    x.signum() * (x.abs() - lambda).max(0.0)
}

fn median_abs(x: &[f64]) -> f64 {
    let mut v: Vec<f64> = x.iter().map(|d| d.abs()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Threshold minimizing Stein's unbiased risk estimate for unit-variance
/// coefficients.
fn sure_threshold(x: &[f64]) -> f64 {
    let n = x.len();
    let mut sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    sq.sort_by(f64::total_cmp);
    let mut best = (f64::INFINITY, 0.0);
    let mut cum = 0.0;
    for (k, &s) in sq.iter().enumerate() {
        cum += s;
        let risk = (n as f64 - 2.0 * (k + 1) as f64 + cum + (n - k - 1) as f64 * s) / n as f64;
        if risk < best.0 {
            best = (risk, s.sqrt());
        }
    }
    best.1
}

/// Threshold for one real detail-coefficient vector of a `signal_len`-sample input.
pub fn detail_threshold(detail: &[f64], signal_len: usize, rule: ThresholdRule) -> f64 {
    if let ThresholdRule::Fixed(t) = rule {
        return t;
    }
    let sigma = median_abs(detail) / MAD_SCALE;
    if sigma == 0.0 {
        return 0.0;
    }
    match rule {
        ThresholdRule::Universal => sigma * (2.0 * (signal_len as f64).ln()).sqrt(),
        ThresholdRule::HeuristicSure => {
            let n = detail.len() as f64;
            let universal = (2.0 * n.ln()).sqrt();
            let normalized: Vec<f64> = detail.iter().map(|d| d / sigma).collect();
            let eta = (normalized.iter().map(|v| v * v).sum::<f64>() - n) / n;
            let crit = n.log2().powf(1.5) / n.sqrt();
            if eta < crit {
                sigma * universal
            } else {
                sigma * sure_threshold(&normalized).min(universal)
            }
        }
        ThresholdRule::Fixed(_) => unreachable!(),
    }
}

/// Level-1 wavelet soft-threshold denoising of a real signal. Odd lengths
/// are zero-padded by one sample and truncated after reconstruction.
pub fn wavelet_denoise_real(samples: &[f64], cfg: &DenoiseConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if samples.len() < 2 {
        return Err(DoaError::Contract(format!("denoising needs at least 2 samples, got {}", samples.len())));
    }
    let mut padded = samples.to_vec();
    if padded.len() % 2 == 1 {
        padded.push(0.0);
    }
    let (approx, mut detail) = dwt_level1(&padded)?;
    let lambda = detail_threshold(&detail, samples.len(), cfg.threshold_rule);
    for d in &mut detail {
        *d = soft_threshold(*d, lambda);
    }
    let mut out = idwt_level1(&approx, &detail)?;
    out.truncate(samples.len());
    Ok(out)
}

/// Complex denoising: real and imaginary parts are processed independently,
/// each with its own noise estimate.
pub fn wavelet_denoise(samples: &[Complex64], cfg: &DenoiseConfig) -> Result<Vec<Complex64>> {
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let re = wavelet_denoise_real(&re, cfg)?;
    let im = wavelet_denoise_real(&im, cfg)?;
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// Band-limited copy of the snapshots and its covariance.
#[derive(Debug, Clone)]
pub struct BandFiltered {
    pub snapshots: SnapshotMatrix,
    pub covariance: CovarianceMatrix,
    pub retained_bins: usize,
}

/// Zeroes DFT bins outside `[f_L, f_H]` on every element.
///
/// The covariance is `(1/(K·L))·Σ_{k∈band} Y[k]·Y^H[k]` over the `K` retained
/// bins of the length-`L` DFT, so white noise of power σ maps to σ·I and the
/// full band reproduces the sample covariance.
pub fn band_filter(snapshots: &SnapshotMatrix, limits: &ObwLimits, sample_rate_hz: f64) -> Result<BandFiltered> {
    let len = snapshots.num_snapshots();
    let nyquist = sample_rate_hz / 2.0;
    let tol = 1e-9 * sample_rate_hz;
    if limits.f_low_hz < -nyquist - tol || limits.f_high_hz > nyquist + tol || limits.f_low_hz > limits.f_high_hz {
        return Err(DoaError::Contract(format!(
            "band [{}, {}] Hz is not inside the Nyquist band ±{nyquist} Hz",
            limits.f_low_hz, limits.f_high_hz
        )));
    }
    let keep: Vec<bool> = (0..len)
        .map(|k| {
            let f = bin_freq(k, len, sample_rate_hz);
            f >= limits.f_low_hz - tol && f <= limits.f_high_hz + tol
        })
        .collect();
    let retained = keep.iter().filter(|&&k| k).count();
    if retained == 0 {
        return Err(DoaError::Contract("no DFT bins fall inside the band".into()));
    }

    let m = snapshots.num_elements();
    let spectra: Vec<Vec<Complex64>> = (0..m)
        .map(|l| {
            dft(snapshots.element(l))
                .into_iter()
                .zip(&keep)
                .map(|(v, &k)| if k { v } else { Complex64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let scale = 1.0 / (retained as f64 * len as f64);
    let matrix = ComplexMatrix::from_fn(m, m, |i, j| {
        spectra[i].iter().zip(&spectra[j]).map(|(a, b)| a * b.conj()).sum::<Complex64>() * scale
    });
    let filtered = SnapshotMatrix::from_rows(spectra.iter().map(|s| idft(s)).collect())?;
    Ok(BandFiltered {
        snapshots: filtered,
        covariance: CovarianceMatrix {
            matrix: matrix.symmetrized(),
            num_snapshots: len,
        },
        retained_bins: retained,
    })
}

pub fn band_filtered_covariance(
    snapshots: &SnapshotMatrix,
    limits: &ObwLimits,
    sample_rate_hz: f64,
) -> Result<CovarianceMatrix> {
    Ok(band_filter(snapshots, limits, sample_rate_hz)?.covariance)
}

/// Which channel the OBW is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObwReference {
    Element(usize),
    /// Mean of the per-element power spectra.
    ArrayAverage,
}

impl Default for ObwReference {
    fn default() -> Self {
        Self::Element(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineOrder {
    /// OBW measured on the denoised signal.
    #[default]
    DenoiseThenObw,
    /// OBW measured on the raw signal, denoising applied afterwards.
    ObwThenDenoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub denoise: DenoiseConfig,
    pub beta: f64,
    pub reference: ObwReference,
    pub order: PipelineOrder,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            denoise: DenoiseConfig::default(),
            beta: 0.01,
            reference: ObwReference::Element(0),
            order: PipelineOrder::DenoiseThenObw,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        self.denoise.validate()?;
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(DoaError::Config(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        Ok(())
    }
}

/// Every intermediate product of the pipeline.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub denoised: SnapshotMatrix,
    pub reference_spectrum: PowerSpectrum,
    pub limits: ObwLimits,
    pub filtered: SnapshotMatrix,
    pub covariance: CovarianceMatrix,
}

fn reference_spectrum(
    snapshots: &SnapshotMatrix,
    reference: ObwReference,
    sample_rate_hz: f64,
) -> Result<PowerSpectrum> {
    match reference {
        ObwReference::Element(l) => {
            if l >= snapshots.num_elements() {
                return Err(DoaError::Config(format!(
                    "OBW reference element {l} does not exist ({} elements)",
                    snapshots.num_elements()
                )));
            }
            power_spectrum(snapshots.element(l), sample_rate_hz)
        }
        ObwReference::ArrayAverage => {
            let m = snapshots.num_elements();
            let mut acc = power_spectrum(snapshots.element(0), sample_rate_hz)?;
            for l in 1..m {
                let p = power_spectrum(snapshots.element(l), sample_rate_hz)?;
                for (a, b) in acc.powers.iter_mut().zip(p.powers) {
                    *a += b;
                }
            }
            for a in &mut acc.powers {
                *a /= m as f64;
            }
            Ok(acc)
        }
    }
}

/// Denoise → reference power spectrum → OBW limits → band-filtered covariance.
pub fn preprocess_pipeline(
    snapshots: &SnapshotMatrix,
    cfg: &PreprocessConfig,
    sample_rate_hz: f64,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let denoise = |s: &SnapshotMatrix| s.map_rows(|row| wavelet_denoise(row, &cfg.denoise));
    let (denoised, spectrum) = match cfg.order {
        PipelineOrder::DenoiseThenObw => {
            let d = denoise(snapshots)?;
            let s = reference_spectrum(&d, cfg.reference, sample_rate_hz)?;
            (d, s)
        }
        PipelineOrder::ObwThenDenoise => {
            let s = reference_spectrum(snapshots, cfg.reference, sample_rate_hz)?;
            (denoise(snapshots)?, s)
        }
    };
    let limits = obw_limits(&spectrum, cfg.beta)?;
    let band = band_filter(&denoised, &limits, sample_rate_hz)?;
    Ok(PipelineOutput {
        denoised,
        reference_spectrum: spectrum,
        limits,
        filtered: band.snapshots,
        covariance: band.covariance,
    })
}
