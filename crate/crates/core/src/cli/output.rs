//! CSV tables.
//!
//! Spectrum: `angle_deg,value,value_db` with `value_db = 10·log10(value / max)`.
//! Sweep: `snr_db,estimator,preprocessing,rmse_deg,resolution_rate,mean_spurious_db,runs`.
//! Numbers use a fixed number of decimals (scientific notation for raw
//! pseudo-spectrum values); non-finite values print as `inf`, `-inf`, `NaN`.

use std::io::Write;

use crate::estimators::Spectrum;
use crate::montecarlo::SweepRow;

pub const SPECTRUM_HEADER: [&str; 3] = ["angle_deg", "value", "value_db"];

pub const SWEEP_HEADER: [&str; 7] = [
    "snr_db",
    "estimator",
    "preprocessing",
    "rmse_deg",
    "resolution_rate",
    "mean_spurious_db",
    "runs",
];

fn fixed(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else {
        format!("{x}")
    }
}

/// Spectrum in dB relative to its maximum.
pub fn spectrum_db(spectrum: &Spectrum) -> Vec<f64> {
    let max = spectrum.max_value();
    spectrum.values.iter().map(|v| 10.0 * (v / max).log10()).collect()
}

pub fn write_spectrum_csv<W: Write>(out: W, spectrum: &Spectrum) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPECTRUM_HEADER)?;
    for ((angle, value), db) in spectrum.grid_deg.iter().zip(&spectrum.values).zip(spectrum_db(spectrum)) {
        w.write_record([fixed(*angle, 4), format!("{value:.9e}"), fixed(db, 6)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fixed(r.snr_db, 3),
            r.method.estimator.name().to_string(),
            if r.method.preprocessing { "on" } else { "off" }.to_string(),
            fixed(r.rmse_deg, 6),
            fixed(r.resolution_rate, 6),
            fixed(r.mean_spurious_db, 6),
            r.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
