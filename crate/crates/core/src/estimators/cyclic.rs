//! Cyclic correlation matrices and Cyclic MUSIC.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::music::{check_source_count, pseudo_spectrum, NoiseSubspace};
use super::spectrum::{Spectrum, SpectrumKind};
use crate::array_model::{ArrayGeometry, SnapshotMatrix};
use crate::error::{DoaError, Result};
use crate::numerics::{svd, ComplexMatrix};

/// Which second-order product the cyclic matrix is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CyclicVariant {
    /// `y(t+τ/2)·y^H(t−τ/2)`: the cyclic autocorrelation matrix.
    #[default]
    Autocorrelation,
    /// `y(t+τ/2)·y^T(t−τ/2)`: the cyclic conjugate autocorrelation matrix.
    Conjugate,
}

/// Generally non-Hermitian; no symmetry is assumed or enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicCorrelationMatrix {
    pub matrix: ComplexMatrix,
    pub cycle_freq_hz: f64,
    pub lag_samples: usize,
    pub variant: CyclicVariant,
    pub num_snapshots: usize,
}

/// `R^α(τ) = (1/N′)·Σ_n y(t_n+τ/2)·y^{H|T}(t_n−τ/2)·e^{−j2πα·t_n}` with
/// `t_n = n/f_s`, summed over the `N′ = N − τ` indices where both shifted
/// samples exist.
pub fn cyclic_correlation(
    snapshots: &SnapshotMatrix,
    alpha_hz: f64,
    lag_samples: usize,
    variant: CyclicVariant,
    sample_rate_hz: f64,
) -> Result<CyclicCorrelationMatrix> {
    if !lag_samples.is_multiple_of(2) {
        return Err(DoaError::Contract(format!("lag must be even, got {lag_samples}")));
    }
    let n = snapshots.num_snapshots();
    if n <= lag_samples {
        return Err(DoaError::Contract(format!(
            "{n} snapshots are too few for a lag of {lag_samples} samples"
        )));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) || !alpha_hz.is_finite() {
        return Err(DoaError::Contract("sample rate must be positive and α finite".into()));
    }
    let half = lag_samples / 2;
    let terms = n - lag_samples;
    let phases: Vec<Complex64> = (half..n - half)
        .map(|idx| Complex64::from_polar(1.0, -2.0 * PI * alpha_hz * idx as f64 / sample_rate_hz))
        .collect();

    let m = snapshots.num_elements();
    let lead: Vec<Vec<Complex64>> = (0..m)
        .map(|i| {
            snapshots.element(i)[lag_samples..]
                .iter()
                .zip(&phases)
                .map(|(y, p)| y * p)
                .collect()
        })
        .collect();
    let trail: Vec<&[Complex64]> = (0..m).map(|j| &snapshots.element(j)[..terms]).collect();

    let matrix = ComplexMatrix::from_fn(m, m, |i, j| {
        let s: Complex64 = match variant {
            CyclicVariant::Autocorrelation => lead[i].iter().zip(trail[j]).map(|(a, b)| a * b.conj()).sum(),
            CyclicVariant::Conjugate => lead[i].iter().zip(trail[j]).map(|(a, b)| a * b).sum(),
        };
        s / terms as f64
    });

    Ok(CyclicCorrelationMatrix {
        matrix,
        cycle_freq_hz: alpha_hz,
        lag_samples,
        variant,
        num_snapshots: n,
    })
}

/// Cyclic MUSIC pseudo-spectrum `1 / max(‖U_n^H a(θ)‖², ε)` from the SVD of
/// the cyclic matrix.
pub fn cyclic_music_spectrum(
    c: &CyclicCorrelationMatrix,
    n_cyclic_sources: usize,
    geometry: &ArrayGeometry,
    grid_deg: &[f64],
) -> Result<Spectrum> {
    let m = c.matrix.rows();
    if m != geometry.num_elements || !c.matrix.is_square() {
        return Err(DoaError::Contract(format!(
            "cyclic matrix is {}x{} but the array has {} elements",
            c.matrix.rows(),
            c.matrix.cols(),
            geometry.num_elements
        )));
    }
    check_source_count(n_cyclic_sources, m)?;
    let dec = svd(&c.matrix)?;
    if dec.singular_values[0] <= f64::MIN_POSITIVE {
        return Err(DoaError::Degenerate(format!(
            "cyclic matrix at α = {} Hz is zero: no cyclostationarity to exploit",
            c.cycle_freq_hz
        )));
    }
    let noise = NoiseSubspace::from_ordered(
        (0..m).map(|i| dec.left_vectors.column(i)),
        &dec.singular_values,
        n_cyclic_sources,
    );
    pseudo_spectrum(noise, geometry, grid_deg, SpectrumKind::CyclicMusicPseudo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{steering_vector, ArrayGeometry, QpskSource, SourceRole, generate_qpsk};
    use crate::estimators::{noise_subspace, null_spectrum, sample_covariance, AngleGrid};

    #[test]
    fn zero_cycle_zero_lag_equals_covariance() {
        let src = QpskSource::new(2e6, 20e6, 20.0, 1.0, SourceRole::Soi).unwrap();
        let rows: Vec<Vec<Complex64>> = (0..4).map(|k| generate_qpsk(&src, 64, k).unwrap()).collect();
        let y = SnapshotMatrix::from_rows(rows).unwrap();
        let c = cyclic_correlation(&y, 0.0, 0, CyclicVariant::Autocorrelation, 20e6).unwrap();
        let r = sample_covariance(&y).unwrap();
        assert_eq!(c.matrix, r.matrix);
    }

    #[test]
    fn constant_signal_cancels_over_full_period() {
        let cval = Complex64::new(0.6, -1.3);
        let n = 200;
        let fs = 1e6;
        let y = SnapshotMatrix::from_rows(vec![vec![cval; n], vec![cval * 2.0; n]]).unwrap();
        for k in [1, 3, 17] {
            let alpha = k as f64 * fs / n as f64;
            let c = cyclic_correlation(&y, alpha, 0, CyclicVariant::Autocorrelation, fs).unwrap();
            assert!(c.matrix.frobenius_norm() <= 1e-10 * cval.norm_sqr());
        }
    }

    #[test]
    fn odd_lag_and_short_input_rejected() {
        let y = SnapshotMatrix::from_rows(vec![vec![Complex64::new(1.0, 0.0); 4]; 2]).unwrap();
        assert!(matches!(
            cyclic_correlation(&y, 1.0, 3, CyclicVariant::Autocorrelation, 10.0),
            Err(DoaError::Contract(_))
        ));
        assert!(cyclic_correlation(&y, 1.0, 4, CyclicVariant::Autocorrelation, 10.0).is_err());
    }

    /// Scalar cyclic autocorrelation written directly from the definition.
    fn scalar_cyclic(x: &[Complex64], alpha: f64, lag: usize, fs: f64) -> Complex64 {
        let h = lag as isize / 2;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut count = 0;
        for n in 0..x.len() as isize {
            let (p, q) = (n + h, n - h);
            if q < 0 || p >= x.len() as isize {
                continue;
            }
            let t = n as f64 / fs;
            acc += x[p as usize] * x[q as usize].conj() * Complex64::new(0.0, -2.0 * PI * alpha * t).exp();
            count += 1;
        }
        acc / count as f64
    }

    #[test]
    fn qpsk_feature_matches_scalar_estimator() {
        let fs = 20e6;
        let src = QpskSource::new(2e6, fs, 20.0, 1.0, SourceRole::Soi).unwrap();
        let x = generate_qpsk(&src, 1000, 99).unwrap();
        let g = ArrayGeometry::half_wavelength(4, 2.4e9);
        let a = steering_vector(&g, 20.0).unwrap().entries;
        let rows = a.iter().map(|&al| x.iter().map(|&s| al * s).collect()).collect();
        let y = SnapshotMatrix::from_rows(rows).unwrap();
        let alpha = src.symbol_rate_hz();
        let c = cyclic_correlation(&y, alpha, 2, CyclicVariant::Autocorrelation, fs).unwrap();
        let oracle = scalar_cyclic(&x, alpha, 2, fs);
        assert!(oracle.norm() > 0.05);
        assert!((c.matrix[(0, 0)] - oracle).norm() <= 1e-10);
    }

    #[test]
    fn rank_one_left_space_peaks_at_source() {
        let g = ArrayGeometry::default();
        let a = steering_vector(&g, 20.0).unwrap().entries;
        let v: Vec<Complex64> = (0..16).map(|k| Complex64::new(0.3 * k as f64, 1.0 - 0.1 * k as f64)).collect();
        let c = CyclicCorrelationMatrix {
            matrix: ComplexMatrix::from_fn(16, 16, |i, j| a[i] * v[j].conj()),
            cycle_freq_hz: 1e6,
            lag_samples: 2,
            variant: CyclicVariant::Autocorrelation,
            num_snapshots: 1,
        };
        let grid = AngleGrid::default().points();
        let s = cyclic_music_spectrum(&c, 1, &g, &grid).unwrap();
        let best = (0..s.len()).max_by(|&x, &y| s.values[x].total_cmp(&s.values[y])).unwrap();
        assert!((s.grid_deg[best] - 20.0).abs() < 1e-9);
        let u_n = dec_noise(&c);
        let f = null_spectrum(&u_n, &g, &[20.0]).unwrap();
        assert!(f[0] <= 1e-8);
    }

    fn dec_noise(c: &CyclicCorrelationMatrix) -> NoiseSubspace {
        let dec = svd(&c.matrix).unwrap();
        NoiseSubspace::from_ordered((0..16).map(|i| dec.left_vectors.column(i)), &dec.singular_values, 1)
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let c = CyclicCorrelationMatrix {
            matrix: ComplexMatrix::zeros(16, 16),
            cycle_freq_hz: 1e6,
            lag_samples: 2,
            variant: CyclicVariant::Autocorrelation,
            num_snapshots: 10,
        };
        let r = cyclic_music_spectrum(&c, 1, &ArrayGeometry::default(), &[10.0, 20.0]);
        assert!(matches!(r, Err(DoaError::Degenerate(_))));
    }

    #[test]
    fn zero_alpha_subspace_matches_music() {
        // noiseless two-source data: left singular space of R equals its eigenspace
        let g = ArrayGeometry::default();
        let s1 = QpskSource::new(2e6, 20e6, 30.0, 1.0, SourceRole::Soi).unwrap();
        let s2 = QpskSource::new(1e6, 20e6, 70.0, 1.0, SourceRole::Soi).unwrap();
        let x1 = generate_qpsk(&s1, 400, 1).unwrap();
        let x2 = generate_qpsk(&s2, 400, 2).unwrap();
        let a1 = steering_vector(&g, 30.0).unwrap().entries;
        let a2 = steering_vector(&g, 70.0).unwrap().entries;
        let rows = (0..16)
            .map(|l| (0..400).map(|t| a1[l] * x1[t] + a2[l] * x2[t]).collect())
            .collect();
        let y = SnapshotMatrix::from_rows(rows).unwrap();
        let r = sample_covariance(&y).unwrap();
        let c = cyclic_correlation(&y, 0.0, 0, CyclicVariant::Autocorrelation, 20e6).unwrap();
        let dec = svd(&c.matrix).unwrap();
        let music_noise = noise_subspace(&r, 2).unwrap();
        // principal angles: top-2 left singular vectors have no component in the MUSIC noise space
        for k in 0..2 {
            let leak = music_noise.projection(&dec.left_vectors.column(k));
            assert!(leak.sqrt() <= 1e-6, "leak {leak}");
        }
    }
}
