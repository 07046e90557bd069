//! `doa-bench` command-line front end.
//!
//! Exit codes: 0 success, 2 input error (unreadable or malformed scenario,
//! invalid settings, bad arguments), 3 runtime error (degenerate data,
//! numerical failure, output not writable).

pub mod output;
pub mod scenario_file;
pub mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::DoaError;
use crate::montecarlo::{run_sweep_with_threads, run_trial, spurious_peak_db, MonteCarloReport};
use crate::scenario::{EstimatorKind, Method, ScenarioConfig};
use scenario_file::{load_scenario_file, LoadError, ScenarioFile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "doa-bench", version, about = "MUSIC / Cyclic MUSIC DOA simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one trial and emit its spatial spectrum.
    Spectrum(SpectrumArgs),
    /// Monte Carlo sweep over SNR points and compared methods.
    Sweep(SweepArgs),
    /// Check a scenario and print it with every default filled in.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Music,
    CyclicMusic,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Music => Self::Music,
            EstimatorArg::CyclicMusic => Self::CyclicMusic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Scenario file, or `paper_default` for the bundled scenario.
    pub scenario: String,
    /// Trial seed [default: the scenario's base_seed].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    /// Accepted for a uniform interface; a single trial runs on one thread.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Override the scenario's estimator.
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// Override the scenario's pre-processing switch.
    #[arg(long, value_enum)]
    pub preprocessing: Option<Switch>,
    /// Override the scenario's SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario file, or `paper_default` for the bundled scenario.
    pub scenario: String,
    /// Override the scenario's base_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination [default: stdout].
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_svg: Option<PathBuf>,
    /// Worker threads; 0 picks one per core, 1 runs serially.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Override the scenario's num_runs.
    #[arg(long)]
    pub runs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Scenario file, or `paper_default` for the bundled scenario.
    pub scenario: String,
}

/// Failure carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<DoaError> for CliError {
    fn from(e: DoaError) -> Self {
        if e.is_input_error() {
            Self::input(e.to_string())
        } else {
            Self::runtime(e.to_string())
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        Self::input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and maps
/// the outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    let stdout = io::stdout();
    let result = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, &mut stdout.lock()),
        Command::Sweep(a) => cmd_sweep(a, &mut stdout.lock()),
        Command::Validate(a) => cmd_validate(a, &mut stdout.lock()),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub fn load_config(arg: &str) -> CliResult<ScenarioConfig> {
    Ok(load_scenario_file(arg)?.to_config()?)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::runtime(format!("write failed: {e}"))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(io_err)
}

pub fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = load_config(&args.scenario)?;
    if let Some(e) = args.estimator {
        cfg.method.estimator = e.into();
    }
    if let Some(p) = args.preprocessing {
        cfg.method.preprocessing = p == Switch::On;
    }
    if let Some(snr) = args.snr_db {
        cfg = cfg.with_snr(snr);
    }
    cfg.validate()?;
    let seed = args.seed.unwrap_or(cfg.base_seed);
    let trial = run_trial(&cfg, seed)?;
    let spurious = spurious_peak_db(&trial.spectrum, &trial.truth_deg, cfg.metrics.spurious_guard_deg)?;

    if let Some(path) = &args.out_csv {
        let mut w = create(path)?;
        output::write_spectrum_csv(&mut w, &trial.spectrum).map_err(io_err)?;
    }
    if let Some(path) = &args.out_svg {
        let plot = svg::Plot {
            title: format!(
                "{} spectrum, {} dB SNR, preprocessing {}",
                cfg.method.estimator.name(),
                cfg.noise.snr_db,
                if cfg.method.preprocessing { "on" } else { "off" }
            ),
            x_label: "angle (deg)".into(),
            y_label: "normalized spectrum (dB)".into(),
            series: vec![svg::Series {
                name: cfg.method.estimator.name().into(),
                points: trial
                    .spectrum
                    .grid_deg
                    .iter()
                    .copied()
                    .zip(output::spectrum_db(&trial.spectrum))
                    .collect(),
            }],
            markers_x: trial.truth_deg.clone(),
        };
        write_text(path, &svg::render(&plot))?;
    }

    let fmt_list = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    let mut report = format!(
        "estimator: {}\npreprocessing: {}\nsnr_db: {}\nseed: {seed}\ntruth_deg: [{}]\nestimates_deg: [{}]\nspurious_peak_db: {:.3}\n",
        cfg.method.estimator.name(),
        if cfg.method.preprocessing { "on" } else { "off" },
        cfg.noise.snr_db,
        fmt_list(&trial.truth_deg),
        fmt_list(&trial.estimate.doas_deg),
        spurious.value_db,
    );
    if let Some(b) = trial.obw {
        report.push_str(&format!("obw_hz: [{}, {}]\n", b.f_low_hz, b.f_high_hz));
    }
    if trial.estimate.incomplete {
        report.push_str("warning: fewer separated peaks than requested\n");
    }
    if spurious.missing_true_peak {
        report.push_str("warning: a true DOA has no local maximum within the guard window\n");
    }
    if !trial.spectrum.warnings.is_empty() {
        report.push_str("warning: no eigenvalue gap between signal and noise subspaces\n");
    }
    out.write_all(report.as_bytes()).map_err(io_err)
}

fn sweep_plot(report: &MonteCarloReport) -> svg::Plot {
    let mut series: Vec<svg::Series> = Vec::new();
    for m in report.scenario.sweep_methods() {
        series.push(svg::Series {
            name: method_label(m),
            points: report
                .rows
                .iter()
                .filter(|r| r.method == m)
                .map(|r| (r.snr_db, r.rmse_deg))
                .collect(),
        });
    }
    svg::Plot {
        title: format!("RMSE vs SNR, {} runs per point", report.scenario.num_runs),
        x_label: "SNR (dB)".into(),
        y_label: "RMSE (deg)".into(),
        series,
        markers_x: Vec::new(),
    }
}

fn method_label(m: Method) -> String {
    format!("{} {}", m.estimator.name(), if m.preprocessing { "+ pre" } else { "" })
        .trim_end()
        .to_string()
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = load_config(&args.scenario)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.num_runs = runs;
    }
    cfg.validate()?;
    let report = run_sweep_with_threads(&cfg, args.threads)?;

    match &args.out_csv {
        Some(path) => {
            let mut w = create(path)?;
            output::write_sweep_csv(&mut w, &report.rows).map_err(io_err)?;
        }
        None => output::write_sweep_csv(&mut *out, &report.rows).map_err(io_err)?,
    }
    if let Some(path) = &args.out_svg {
        write_text(path, &svg::render(&sweep_plot(&report)))?;
    }
    for r in report.rows.iter().filter(|r| r.failed_runs > 0) {
        eprintln!(
            "warning: {} of {} runs failed at {} dB for {}",
            r.failed_runs,
            r.failed_runs + r.runs,
            r.snr_db,
            method_label(r.method)
        );
    }
    eprintln!("elapsed: {:.2} s", report.elapsed.as_secs_f64());
    Ok(())
}

pub fn cmd_validate(args: &ValidateArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = load_config(&args.scenario)?;
    let text = ScenarioFile::from_config(&cfg).to_toml();
    out.write_all(text.as_bytes()).map_err(io_err)
}
