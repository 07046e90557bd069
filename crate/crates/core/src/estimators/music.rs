//! MUSIC: noise-subspace projection of the steering vector.

use num_complex::Complex64;

use super::covariance::CovarianceMatrix;
use super::spectrum::{Spectrum, SpectrumKind, SpectrumWarning, SPECTRUM_FLOOR};
use crate::array_model::{steering_entries, ArrayGeometry};
use crate::error::{DoaError, Result};
use crate::numerics::hermitian_evd;

/// Relative eigen/singular-value gap below which the subspace split is flagged.
const DEGENERATE_GAP: f64 = 1e-9;

/// Orthonormal basis of the estimated noise subspace.
#[derive(Debug, Clone)]
pub struct NoiseSubspace {
    pub basis: Vec<Vec<Complex64>>,
    pub warnings: Vec<SpectrumWarning>,
}

impl NoiseSubspace {
    /// ‖G^H a‖² = Σ_g |g^H a|².
    pub fn projection(&self, a: &[Complex64]) -> f64 {
        self.basis
            .iter()
            .map(|g| g.iter().zip(a).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr())
            .sum()
    }

    pub(crate) fn from_ordered(
        vectors: impl Iterator<Item = Vec<Complex64>>,
        values: &[f64],
        n_sources: usize,
    ) -> Self {
        let basis: Vec<_> = vectors.skip(n_sources).collect();
        let mut warnings = Vec::new();
        let last_signal = values[n_sources - 1];
        let first_noise = values[n_sources];
        let scale = values[0].abs().max(f64::MIN_POSITIVE);
        if (last_signal - first_noise).abs() <= DEGENERATE_GAP * scale {
            warnings.push(SpectrumWarning::DegenerateSubspace { last_signal, first_noise });
        }
        Self { basis, warnings }
    }
}

pub(crate) fn check_source_count(n_sources: usize, m: usize) -> Result<()> {
    if n_sources == 0 || n_sources >= m {
        return Err(DoaError::ModelViolation(format!(
            "number of sources must satisfy 1 <= n < m = {m}, got {n_sources}"
        )));
    }
    Ok(())
}

/// Splits the EVD of `R` into the top-`n_sources` signal part and the noise part.
pub fn noise_subspace(r: &CovarianceMatrix, n_sources: usize) -> Result<NoiseSubspace> {
    let m = r.dim();
    check_source_count(n_sources, m)?;
    let evd = hermitian_evd(&r.matrix)?;
    Ok(NoiseSubspace::from_ordered(
        (0..m).map(|i| evd.eigenvector(i)),
        &evd.eigenvalues,
        n_sources,
    ))
}

/// Null spectrum `a^H(θ)·G·G^H·a(θ)` on the grid; zero at true directions.
pub fn null_spectrum(noise: &NoiseSubspace, geometry: &ArrayGeometry, grid_deg: &[f64]) -> Result<Vec<f64>> {
    geometry.validate()?;
    Ok(grid_deg
        .iter()
        .map(|&t| {
            let a = steering_entries(geometry.num_elements, geometry.electrical_phase(t));
            noise.projection(&a)
        })
        .collect())
}

pub(crate) fn pseudo_spectrum(
    noise: NoiseSubspace,
    geometry: &ArrayGeometry,
    grid_deg: &[f64],
    kind: SpectrumKind,
) -> Result<Spectrum> {
    if grid_deg.is_empty() {
        return Err(DoaError::Contract("angle grid is empty".into()));
    }
    let values = null_spectrum(&noise, geometry, grid_deg)?
        .into_iter()
        .map(|f| 1.0 / f.max(SPECTRUM_FLOOR))
        .collect();
    let mut spectrum = Spectrum::new(grid_deg.to_vec(), values, kind)?;
    spectrum.warnings = noise.warnings;
    Ok(spectrum)
}

/// MUSIC pseudo-spectrum `1 / max(a^H G G^H a, ε)`.
pub fn music_spectrum(
    r: &CovarianceMatrix,
    n_sources: usize,
    geometry: &ArrayGeometry,
    grid_deg: &[f64],
) -> Result<Spectrum> {
    if r.dim() != geometry.num_elements {
        return Err(DoaError::Contract(format!(
            "covariance is {0}x{0} but the array has {1} elements",
            r.dim(),
            geometry.num_elements
        )));
    }
    let noise = noise_subspace(r, n_sources)?;
    pseudo_spectrum(noise, geometry, grid_deg, SpectrumKind::MusicPseudo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::steering_vector;
    use crate::estimators::AngleGrid;
    use crate::numerics::ComplexMatrix;

    fn rank_one(geometry: &ArrayGeometry, theta: f64) -> CovarianceMatrix {
        let a = steering_vector(geometry, theta).unwrap().entries;
        CovarianceMatrix {
            matrix: ComplexMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj()),
            num_snapshots: 1,
        }
    }

    fn argmax(v: &[f64]) -> usize {
        let mut best = 0;
        for (i, &x) in v.iter().enumerate() {
            if x > v[best] {
                best = i;
            }
        }
        best
    }

    #[test]
    fn exact_rank_one_peaks_at_source() {
        let g = ArrayGeometry::default();
        let grid = AngleGrid::default().points();
        let r = rank_one(&g, 20.0);
        let s = music_spectrum(&r, 1, &g, &grid).unwrap();
        assert!((s.grid_deg[argmax(&s.values)] - 20.0).abs() < 1e-9);
        let noise = noise_subspace(&r, 1).unwrap();
        let f = null_spectrum(&noise, &g, &[20.0]).unwrap();
        assert!(f[0] <= 1e-8);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn identity_is_flagged_degenerate() {
        let g = ArrayGeometry::default();
        let grid = AngleGrid::default().points();
        let r = CovarianceMatrix { matrix: ComplexMatrix::identity(16), num_snapshots: 1 };
        let a = music_spectrum(&r, 1, &g, &grid).unwrap();
        let b = music_spectrum(&r, 1, &g, &grid).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a.warnings[0], SpectrumWarning::DegenerateSubspace { .. }));
    }

    #[test]
    fn too_many_sources_is_model_violation() {
        let g = ArrayGeometry::default();
        let r = rank_one(&g, 20.0);
        assert!(matches!(music_spectrum(&r, 16, &g, &[10.0]), Err(DoaError::ModelViolation(_))));
        assert!(matches!(music_spectrum(&r, 0, &g, &[10.0]), Err(DoaError::ModelViolation(_))));
    }

    #[test]
    fn scale_invariant_argmax() {
        let g = ArrayGeometry::default();
        let grid = AngleGrid::default().points();
        let r1 = rank_one(&g, 40.0);
        let r2 = rank_one(&g, 100.0);
        let mut r = CovarianceMatrix {
            matrix: r1.matrix.add(&r2.matrix.scale(0.5)).unwrap().add(&ComplexMatrix::identity(16).scale(0.1)).unwrap(),
            num_snapshots: 1,
        };
        r.matrix = r.matrix.symmetrized();
        let a = music_spectrum(&r, 2, &g, &grid).unwrap();
        let b = music_spectrum(&r.scaled(37.5), 2, &g, &grid).unwrap();
        assert_eq!(argmax(&a.values), argmax(&b.values));
    }
}
