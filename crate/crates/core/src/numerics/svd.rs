//! Singular value decomposition by one-sided (Hestenes) complex Jacobi.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{DoaError, Result};

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-15;
/// Singular values below this fraction of the largest get completed left vectors.
const RANK_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Square unitary matrix of left singular vectors (rows × rows).
    pub left_vectors: ComplexMatrix,
    /// min(rows, cols) non-negative values, descending.
    pub singular_values: Vec<f64>,
    /// Square unitary matrix of right singular vectors (cols × cols).
    pub right_vectors: ComplexMatrix,
}

impl SvdResult {
    /// Rebuilds `U Σ V^H` (used in tests and diagnostics).
    pub fn reconstruct(&self) -> ComplexMatrix {
        let rows = self.left_vectors.rows();
        let cols = self.right_vectors.rows();
        ComplexMatrix::from_fn(rows, cols, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, &s)| self.left_vectors[(i, k)] * s * self.right_vectors[(j, k)].conj())
                .sum()
        })
    }
}

/// Full SVD `M = U Σ V^H` of any finite complex matrix.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    if !m.is_finite() {
        return Err(DoaError::Contract("SVD input has non-finite entries".into()));
    }
    if m.rows() < m.cols() {
        let t = tall_svd(&m.conj_transpose())?;
        return Ok(SvdResult {
            left_vectors: t.right_vectors,
            singular_values: t.singular_values,
            right_vectors: t.left_vectors,
        });
    }
    tall_svd(m)
}

fn tall_svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<Complex64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); cols];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let alpha = norm_sqr(&a[p]);
                let beta = norm_sqr(&a[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let mag = gamma.norm();
                if mag <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let u = gamma / mag;
                let theta = (beta - alpha) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let su = u * (t * c);
                rotate_pair(&mut a, p, q, c, su);
                rotate_pair(&mut v, p, q, c, su);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = a.iter().map(|col| norm_sqr(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let sigma_max = order.first().map_or(0.0, |&i| sigma[i]);

    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(rows);
    for &j in &order {
        let s = sigma[j];
        if s > 0.0 && s > RANK_TOL * sigma_max {
            left.push(a[j].iter().map(|x| x / s).collect());
        } else {
            break;
        }
    }
    complete_basis(&mut left, rows);

    let singular_values: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    let right: Vec<Vec<Complex64>> = order.iter().map(|&j| v[j].clone()).collect();

    Ok(SvdResult {
        left_vectors: ComplexMatrix::from_columns(&left)?,
        singular_values,
        right_vectors: ComplexMatrix::from_columns(&right)?,
    })
}

fn rotate_pair(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, su: Complex64) {
    let su_conj = su.conj();
    let (head, tail) = cols.split_at_mut(q);
    let xp = &mut head[p];
    let xq = &mut tail[0];
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let ap = *a;
        let aq = *b;
        *a = ap * c - aq * su_conj;
        *b = ap * su + aq * c;
    }
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

/// Extends an orthonormal set to a full basis of C^n using the standard
/// basis vectors in index order (two Gram–Schmidt passes each).
fn complete_basis(basis: &mut Vec<Vec<Complex64>>, n: usize) {
    let mut candidate = 0;
    while basis.len() < n && candidate < n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[candidate] = Complex64::new(1.0, 0.0);
        candidate += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let proj: Complex64 = b.iter().zip(&e).map(|(x, y)| x.conj() * y).sum();
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= bi * proj;
                }
            }
        }
        let norm = norm_sqr(&e).sqrt();
        if norm > 1e-8 {
            basis.push(e.into_iter().map(|x| x / norm).collect());
        }
    }
}
