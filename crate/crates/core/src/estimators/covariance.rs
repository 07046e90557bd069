use num_complex::Complex64;

use crate::array_model::SnapshotMatrix;
use crate::error::{DoaError, Result};
use crate::numerics::ComplexMatrix;

/// Sample spatial covariance of `num_snapshots` snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub matrix: ComplexMatrix,
    pub num_snapshots: usize,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Positive multiple of this covariance (subspaces unchanged).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix.scale(c),
            num_snapshots: self.num_snapshots,
        }
    }
}

/// `R = (1/N)·Σ_t y(t)·y^H(t)`, symmetrized.
pub fn sample_covariance(snapshots: &SnapshotMatrix) -> Result<CovarianceMatrix> {
    let n = snapshots.num_snapshots();
    if n == 0 {
        return Err(DoaError::Contract("covariance needs at least one snapshot".into()));
    }
    let m = snapshots.num_elements();
    let matrix = ComplexMatrix::from_fn(m, m, |i, j| {
        outer_sum(snapshots.element(i), snapshots.element(j)) / n as f64
    });
    Ok(CovarianceMatrix {
        matrix: matrix.symmetrized(),
        num_snapshots: n,
    })
}

/// `Σ_t a[t]·conj(b[t])`.
pub(crate) fn outer_sum(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}
