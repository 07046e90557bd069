//! Dense complex kernels used by the estimators and the pre-processor.

mod eigen;
mod fourier;
mod matrix;
mod svd;
mod wavelet;

pub use eigen::{hermitian_evd, EvdResult};
pub use fourier::{dft, idft};
pub use matrix::ComplexMatrix;
pub use svd::{svd, SvdResult};
pub use wavelet::{dwt_level1, idwt_level1, HaarSample, WaveletFamily};
