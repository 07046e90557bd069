//! Narrowband direction-of-arrival estimation on a uniform linear array.
//!
//! The crate covers the full experiment chain:
//!
//! - [`array_model`]: steering vectors, rectangular-pulse QPSK sources,
//!   fading channels and calibrated white noise.
//! - [`numerics`]: dense complex kernels (Hermitian Jacobi EVD, one-sided
//!   Jacobi SVD, DFT, level-1 Haar DWT).
//! - [`estimators`]: sample covariance, MUSIC, cyclic correlation matrices,
//!   Cyclic MUSIC and peak extraction.
//! - [`preprocess`]: power spectrum, occupied-bandwidth limits, wavelet
//!   soft-threshold denoising and the band-filtered covariance.
//! - [`montecarlo`]: seeded trials, RMSE / resolution / spurious-peak metrics
//!   and SNR sweeps.
//! - [`cli`]: scenario files, CSV and SVG emission behind the `doa-bench`
//!   binary.
//!
//! Angles follow the array-axis convention: θ is measured from the array
//! axis (endfire = 0°, broadside = 90°) and the element-to-element phase is
//! φ = (2π/λ)·d·cos θ.

pub mod array_model;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod numerics;
pub mod preprocess;
pub mod rng;
pub mod scenario;

pub use error::{DoaError, Result};
pub use num_complex::Complex64;
