//! Seeded trials, accuracy metrics and SNR sweeps.
//!
//! Trial `i` of every sweep point uses seed `base_seed + i`, and synthesis
//! depends only on the signal part of the scenario, so all compared methods
//! see identical received data. Trials may run in parallel; results are
//! collected in index order and reduced serially, so reports do not depend
//! on the thread count.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::array_model::{synthesize_snapshots, SnapshotMatrix};
use crate::error::{DoaError, Result};
use crate::estimators::{
    cyclic_correlation, cyclic_music_spectrum, find_peaks, local_maxima, music_spectrum, sample_covariance,
    EstimationResult, Spectrum,
};
use crate::preprocess::{preprocess_pipeline, ObwLimits};
use crate::scenario::{EstimatorKind, Method, ScenarioConfig};

/// Everything one trial produced.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    /// Received data before any pre-processing.
    pub snapshots: SnapshotMatrix,
    pub spectrum: Spectrum,
    pub estimate: EstimationResult,
    pub truth_deg: Vec<f64>,
    /// Band used when the pre-processor is on.
    pub obw: Option<ObwLimits>,
}

/// Synthesis → optional pre-processing → estimator → peak extraction, using
/// `scenario.method` at `scenario.noise`.
pub fn run_trial(scenario: &ScenarioConfig, seed: u64) -> Result<TrialOutput> {
    scenario.validate()?;
    let snapshots = synthesize_snapshots(scenario, seed)?;
    estimate_from_snapshots(scenario, snapshots)
}

/// The estimation half of [`run_trial`] on caller-supplied data.
pub fn estimate_from_snapshots(scenario: &ScenarioConfig, snapshots: SnapshotMatrix) -> Result<TrialOutput> {
    let Method { estimator, preprocessing } = scenario.method;
    let fs = scenario.sample_rate_hz;
    let grid = scenario.grid.points();
    let pipeline = if preprocessing {
        Some(preprocess_pipeline(&snapshots, &scenario.preprocess, fs)?)
    } else {
        None
    };

    let spectrum = match estimator {
        EstimatorKind::Music => {
            let r = match &pipeline {
                Some(p) => p.covariance.clone(),
                None => sample_covariance(&snapshots)?,
            };
            music_spectrum(&r, scenario.num_peaks(estimator), &scenario.geometry, &grid)?
        }
        EstimatorKind::CyclicMusic => {
            let data = pipeline.as_ref().map_or(&snapshots, |p| &p.filtered);
            let c = &scenario.cyclic;
            let matrix = cyclic_correlation(data, c.alpha_hz, c.lag_samples, c.variant, fs)?;
            cyclic_music_spectrum(&matrix, c.n_cyclic_sources, &scenario.geometry, &grid)?
        }
    };
    let estimate = find_peaks(&spectrum, scenario.num_peaks(estimator), scenario.metrics.peak_guard_deg)?;
    Ok(TrialOutput {
        snapshots,
        spectrum,
        estimate,
        truth_deg: scenario.truth(estimator),
        obw: pipeline.map(|p| p.limits),
    })
}

/// Minimum-total-absolute-error assignment of `rows` to distinct `cols`
/// (`rows.len() <= cols.len()`). Returns the column index for each row.
///
/// On a line an optimal assignment never crosses, so after sorting both
/// sides a DP over (rows used, cols seen) is exact.
fn assign_min_abs(rows: &[f64], cols: &[f64]) -> Vec<usize> {
    let (r, c) = (rows.len(), cols.len());
    debug_assert!(r <= c);
    let mut ri: Vec<usize> = (0..r).collect();
    let mut ci: Vec<usize> = (0..c).collect();
    ri.sort_by(|&a, &b| rows[a].total_cmp(&rows[b]));
    ci.sort_by(|&a, &b| cols[a].total_cmp(&cols[b]));

    // dp[i][j]: best cost matching the first i sorted rows into the first j sorted cols
    let mut dp = vec![vec![f64::INFINITY; c + 1]; r + 1];
    dp[0].fill(0.0);
    for i in 1..=r {
        for j in i..=c {
            let take = dp[i - 1][j - 1] + (rows[ri[i - 1]] - cols[ci[j - 1]]).abs();
            dp[i][j] = dp[i][j - 1].min(take);
        }
    }
    let mut out = vec![0; r];
    let (mut i, mut j) = (r, c);
    while i > 0 {
        let take = dp[i - 1][j - 1] + (rows[ri[i - 1]] - cols[ci[j - 1]]).abs();
        if take <= dp[i][j - 1] {
            out[ri[i - 1]] = ci[j - 1];
            i -= 1;
        }
        j -= 1;
    }
    out
}

/// Absolute error per truth after optimal matching. `min(truths, estimates)`
/// pairs are matched; truths left over are charged `miss_penalty_deg`.
pub fn matched_errors(estimates_deg: &[f64], truth_deg: &[f64], miss_penalty_deg: f64) -> Vec<f64> {
    let mut errors = vec![miss_penalty_deg; truth_deg.len()];
    if truth_deg.len() <= estimates_deg.len() {
        for (t, e) in assign_min_abs(truth_deg, estimates_deg).into_iter().enumerate() {
            errors[t] = (truth_deg[t] - estimates_deg[e]).abs();
        }
    } else {
        for (e, t) in assign_min_abs(estimates_deg, truth_deg).into_iter().enumerate() {
            errors[t] = (truth_deg[t] - estimates_deg[e]).abs();
        }
    }
    errors
}

/// `sqrt(mean of squared matched errors)` over all runs and truths.
pub fn rmse(estimates: &[EstimationResult], truth_deg: &[f64], miss_penalty_deg: f64) -> Result<f64> {
    if estimates.is_empty() || truth_deg.is_empty() {
        return Err(DoaError::Contract("rmse needs at least one run and one truth".into()));
    }
    let mut sum = 0.0;
    for est in estimates {
        sum += matched_errors(&est.doas_deg, truth_deg, miss_penalty_deg)
            .iter()
            .map(|e| e * e)
            .sum::<f64>();
    }
    Ok((sum / (estimates.len() * truth_deg.len()) as f64).sqrt())
}

/// True when every truth has an estimate within `tolerance_deg`.
pub fn is_resolved(estimates_deg: &[f64], truth_deg: &[f64], tolerance_deg: f64) -> bool {
    estimates_deg.len() >= truth_deg.len()
        && matched_errors(estimates_deg, truth_deg, f64::INFINITY)
            .iter()
            .all(|&e| e <= tolerance_deg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpuriousPeak {
    /// `10·log10(spurious / true)`; `-inf` when there is no spurious maximum.
    pub value_db: f64,
    /// Linear ratio behind `value_db`.
    pub ratio: f64,
    /// Some truth window held no local maximum; its window maximum was used.
    pub missing_true_peak: bool,
}

/// Tallest local maximum outside every `truth ± guard` window relative to the
/// smallest true peak. The true peak of each truth is the largest value in
/// its window.
pub fn spurious_peak_db(spectrum: &Spectrum, truth_deg: &[f64], guard_deg: f64) -> Result<SpuriousPeak> {
    if truth_deg.is_empty() {
        return Err(DoaError::Contract("spurious peak needs at least one truth".into()));
    }
    if !(guard_deg >= 0.0) {
        return Err(DoaError::Contract(format!("guard must be non-negative, got {guard_deg}")));
    }
    let grid = &spectrum.grid_deg;
    let values = &spectrum.values;
    let maxima = local_maxima(values);
    let in_window = |angle: f64, t: f64| (angle - t).abs() <= guard_deg;

    let mut true_peak = f64::INFINITY;
    let mut missing = false;
    for &t in truth_deg {
        let mut best: Option<f64> = None;
        for (g, v) in grid.iter().zip(values) {
            if in_window(*g, t) {
                best = Some(best.map_or(*v, |b: f64| b.max(*v)));
            }
        }
        let peak = best.unwrap_or_else(|| values[spectrum.nearest_index(t)]);
        if !maxima.iter().any(|&i| in_window(grid[i], t)) {
            missing = true;
        }
        true_peak = true_peak.min(peak);
    }

    let spurious = maxima
        .iter()
        .filter(|&&i| truth_deg.iter().all(|&t| !in_window(grid[i], t)))
        .map(|&i| values[i])
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let ratio = match spurious {
        None => 0.0,
        Some(s) if true_peak > 0.0 => s / true_peak,
        Some(_) => f64::INFINITY,
    };
    Ok(SpuriousPeak {
        value_db: 10.0 * ratio.log10(),
        ratio,
        missing_true_peak: missing,
    })
}

/// Per-trial numbers feeding the aggregates.
#[derive(Debug, Clone, PartialEq)]
struct TrialMetrics {
    errors: Vec<f64>,
    resolved: bool,
    spurious_ratio: f64,
    incomplete: bool,
    missing_true_peak: bool,
}

fn trial_metrics(scenario: &ScenarioConfig, seed: u64) -> Result<TrialMetrics> {
    let out = run_trial(scenario, seed)?;
    let m = &scenario.metrics;
    let spurious = spurious_peak_db(&out.spectrum, &out.truth_deg, m.spurious_guard_deg)?;
    Ok(TrialMetrics {
        errors: matched_errors(&out.estimate.doas_deg, &out.truth_deg, m.miss_penalty_deg),
        resolved: is_resolved(&out.estimate.doas_deg, &out.truth_deg, m.match_tolerance_deg),
        spurious_ratio: spurious.ratio,
        incomplete: out.estimate.incomplete,
        missing_true_peak: spurious.missing_true_peak,
    })
}

/// Aggregates of one (SNR, method) point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub method: Method,
    pub rmse_deg: f64,
    /// Fraction of successful runs with every truth matched within tolerance.
    pub resolution_rate: f64,
    /// `10·log10` of the mean linear spurious-to-true ratio; runs without a
    /// spurious maximum contribute zero.
    pub mean_spurious_db: f64,
    /// Successful runs.
    pub runs: usize,
    pub failed_runs: usize,
    pub incomplete_runs: usize,
    pub missing_true_peak_runs: usize,
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub rows: Vec<SweepRow>,
    pub scenario: ScenarioConfig,
    pub elapsed: Duration,
}

fn aggregate(snr_db: f64, method: Method, trials: Vec<Result<TrialMetrics>>) -> SweepRow {
    let mut sq = 0.0;
    let mut count = 0usize;
    let mut resolved = 0usize;
    let mut spurious = 0.0;
    let (mut runs, mut failed, mut incomplete, mut missing) = (0, 0, 0, 0);
    for t in trials {
        match t {
            Ok(t) => {
                runs += 1;
                sq += t.errors.iter().map(|e| e * e).sum::<f64>();
                count += t.errors.len();
                resolved += usize::from(t.resolved);
                spurious += t.spurious_ratio;
                incomplete += usize::from(t.incomplete);
                missing += usize::from(t.missing_true_peak);
            }
            Err(_) => failed += 1,
        }
    }
    let (rmse_deg, resolution_rate, mean_spurious_db) = if runs == 0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (
            (sq / count as f64).sqrt(),
            resolved as f64 / runs as f64,
            10.0 * (spurious / runs as f64).log10(),
        )
    };
    SweepRow {
        snr_db,
        method,
        rmse_deg,
        resolution_rate,
        mean_spurious_db,
        runs,
        failed_runs: failed,
        incomplete_runs: incomplete,
        missing_true_peak_runs: missing,
    }
}

/// Sweep with rayon's default thread count.
pub fn run_sweep(scenario: &ScenarioConfig) -> Result<MonteCarloReport> {
    run_sweep_with_threads(scenario, 0)
}

/// Runs `num_runs` trials for every SNR point and compared method.
/// `threads = 1` runs serially, `0` picks the rayon default.
pub fn run_sweep_with_threads(scenario: &ScenarioConfig, threads: usize) -> Result<MonteCarloReport> {
    scenario.validate()?;
    let start = Instant::now();
    let mut jobs = Vec::new();
    for snr in scenario.sweep_points() {
        for method in scenario.sweep_methods() {
            jobs.push(scenario.with_snr(snr).with_method(method));
        }
    }
    let seeds: Vec<u64> = (0..scenario.num_runs as u64)
        .map(|i| scenario.base_seed.wrapping_add(i))
        .collect();

    let run_point = |s: &ScenarioConfig| -> Vec<Result<TrialMetrics>> {
        if threads == 1 {
            seeds.iter().map(|&seed| trial_metrics(s, seed)).collect()
        } else {
            seeds.par_iter().map(|&seed| trial_metrics(s, seed)).collect()
        }
    };
    let results: Vec<Vec<Result<TrialMetrics>>> = if threads == 1 {
        jobs.iter().map(run_point).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| DoaError::Config(format!("cannot start {threads} worker threads: {e}")))?;
        pool.install(|| jobs.iter().map(run_point).collect())
    };

    let rows = jobs
        .iter()
        .zip(results)
        .map(|(s, trials)| aggregate(s.noise.snr_db, s.method, trials))
        .collect();
    Ok(MonteCarloReport {
        rows,
        scenario: scenario.clone(),
        elapsed: start.elapsed(),
    })
}
