//! Single-level orthonormal Haar transform.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};

/// Wavelet families available to the denoiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletFamily {
    #[default]
    Haar,
}

/// Sample types the Haar transform operates on (real or complex).
pub trait HaarSample:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl HaarSample for f64 {}
impl HaarSample for Complex64 {}

/// `approx[i] = (x[2i] + x[2i+1])/√2`, `detail[i] = (x[2i] − x[2i+1])/√2`.
pub fn dwt_level1<T: HaarSample>(x: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if !x.len().is_multiple_of(2) {
        return Err(DoaError::Contract(format!(
            "Haar analysis needs an even length, got {}",
            x.len()
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(x.chunks_exact(2)
        .map(|p| ((p[0] + p[1]) * s, (p[0] - p[1]) * s))
        .unzip())
}

pub fn idwt_level1<T: HaarSample>(approx: &[T], detail: &[T]) -> Result<Vec<T>> {
    if approx.len() != detail.len() {
        return Err(DoaError::Contract(format!(
            "approximation ({}) and detail ({}) lengths differ",
            approx.len(),
            detail.len()
        )));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * approx.len());
    for (&a, &d) in approx.iter().zip(detail) {
        out.push((a + d) * s);
        out.push((a - d) * s);
    }
    Ok(out)
}
