//! Subspace DOA estimators and the spectrum/peak types they share.

mod covariance;
mod cyclic;
mod music;
mod peaks;
mod spectrum;

pub use covariance::{sample_covariance, CovarianceMatrix};
pub use cyclic::{cyclic_correlation, cyclic_music_spectrum, CyclicCorrelationMatrix, CyclicVariant};
pub use music::{music_spectrum, noise_subspace, null_spectrum, NoiseSubspace};
pub use peaks::{find_peaks, local_maxima, EstimationResult};
pub use spectrum::{AngleGrid, Spectrum, SpectrumKind, SpectrumWarning, SPECTRUM_FLOOR};
