//! Unnormalized forward DFT and 1/L-normalized inverse, backed by `rustfft`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `X[k] = Σ_n x[n]·e^{−j2πkn/L}`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// `x[n] = (1/L)·Σ_k X[k]·e^{+j2πkn/L}`.
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}
