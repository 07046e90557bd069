//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{DoaError, Result};

const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EvdResult {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EvdResult {
    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        self.eigenvectors.column(i)
    }
}

/// Eigendecomposition `M = V Λ V^H` of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; equal eigenvalues keep the order of
/// their diagonal position after convergence. Each eigenvector is rotated so
/// that its largest-magnitude entry (first one on ties) is real and positive.
pub fn hermitian_evd(m: &ComplexMatrix) -> Result<EvdResult> {
    if !m.is_square() {
        return Err(DoaError::Contract(format!(
            "EVD needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(DoaError::Contract("EVD input has non-finite entries".into()));
    }
    let norm = m.frobenius_norm();
    if m.hermitian_defect() > HERMITIAN_TOL * norm {
        return Err(DoaError::Contract(
            "EVD input is not Hermitian; symmetrize before calling".into(),
        ));
    }

    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * norm {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    // stable sort keeps the diagonal order for exact ties
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let columns: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&i| normalize_phase(v.column(i)))
        .collect();
    Ok(EvdResult {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_columns(&columns)?,
    })
}

/// Zeroes `a[p][q]` with the unitary rotation
/// `R = [[c, s·u], [−s·u*, c]]` on the (p, q) plane, `u = a_pq / |a_pq|`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip rotations that would not change the diagonal in floating point
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let u = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let su = u * s;
    let su_conj = su.conj();

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * su_conj;
        a[(k, q)] = akp * su + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * su;
        a[(q, k)] = apk * su_conj + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * su_conj;
        v[(k, q)] = vkp * su + vkq * c;
    }
}

pub(crate) fn normalize_phase(mut col: Vec<Complex64>) -> Vec<Complex64> {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, x) in col.iter().enumerate() {
        let mag = x.norm();
        if mag > best_mag {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let phase = col[best].conj() / best_mag;
        for x in &mut col {
            *x *= phase;
        }
        col[best] = Complex64::new(col[best].norm(), 0.0);
    }
    col
}
