use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_doa-bench");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_paper_default_echoes_defaults() {
    let out = run(&["validate", "paper_default"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("num_elements = 16"));
    assert!(text.contains("carrier_freq_hz = 2400000000.0"));
    assert!(text.contains("spacing_m = 0.0625"));
    assert!(text.contains("threshold_rule = \"universal\""));
}

#[test]
fn validate_rejects_odd_lag() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "lag.toml", "[cyclic]\nlag_samples = 3\n");
    let out = run(&["validate", &f]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("lag must be even"));
}

#[test]
fn validate_rejects_as_many_sources_as_elements() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("[array]\nnum_elements = 16\n");
    for k in 0..16 {
        text.push_str(&format!("[[sources]]\nbit_rate_bps = 2e6\ndoa_deg = {}\n", 10.0 + 10.0 * k as f64));
    }
    let f = write(dir.path(), "many.toml", &text);
    let out = run(&["validate", &f]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("model violation"), "{}", stderr(&out));
}

#[test]
fn missing_file_and_parse_errors_exit_2() {
    let out = run(&["spectrum", "/nonexistent/scenario.toml"]);
    assert_eq!(code(&out), 2);
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.toml", "num_runs = 1\nnum_snapshots = [\n");
    let out = run(&["validate", &f]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
    let f = write(dir.path(), "unknown.toml", "[grid]\nstep = 0.1\n");
    assert_eq!(code(&run(&["validate", &f])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn unwritable_output_exits_3() {
    let out = run(&["spectrum", "paper_default", "--out-csv", "/nonexistent/dir/s.csv"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn spectrum_writes_full_grid_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("s.csv");
    let svg_path = dir.path().join("s.svg");
    let out = run(&[
        "spectrum",
        "paper_default",
        "--seed",
        "7",
        "--out-csv",
        csv_path.to_str().unwrap(),
        "--out-svg",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["angle_deg", "value", "value_db"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1801);
    assert_eq!(&rows[0][0], "0.0000");
    assert_eq!(&rows[1800][0], "180.0000");
    let max_db = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max_db, 0.0);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("stroke-dasharray"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("estimates_deg"));
}

fn spurious_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .find(|l| l.starts_with("spurious_peak_db"))
        .unwrap()
        .to_string()
}

#[test]
fn pipeline_changes_spurious_peak_at_low_snr() {
    let base = ["spectrum", "paper_default", "--seed", "11", "--snr-db", "-10"];
    let off = run(&[&base[..], &["--preprocessing", "off"]].concat());
    let on = run(&[&base[..], &["--preprocessing", "on"]].concat());
    assert_eq!(code(&off), 0);
    assert_eq!(code(&on), 0);
    assert_ne!(spurious_line(&off), spurious_line(&on));
    assert!(String::from_utf8_lossy(&on.stdout).contains("obw_hz"));
}

#[test]
fn sweep_rows_and_byte_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "small.toml",
        "num_runs = 3\nnum_snapshots = 400\nsnr_sweep_db = [0.0, 5.0, 10.0, 15.0, 20.0]\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let svg = dir.path().join("r.svg");
    let out = run(&["sweep", &f, "--out-csv", a.to_str().unwrap(), "--out-svg", svg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&["sweep", &f, "--out-csv", b.to_str().unwrap(), "--threads", "1"]);
    assert_eq!(code(&out), 0);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["snr_db", "estimator", "preprocessing", "rmse_deg", "resolution_rate", "mean_spurious_db", "runs"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| &r[6] == "3"));
    let svg = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(svg.matches("<path").count(), 4);
}

#[test]
fn sweep_to_stdout_with_overrides() {
    let out = run(&["sweep", "paper_default", "--runs", "2", "--seed", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",2")));
}
