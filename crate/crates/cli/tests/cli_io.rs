//! End-to-end checks of the `delaylab` binary: exit codes, file emission,
//! override precedence, and lossless round trips of everything it writes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use delaylab::output::{analytic_from_csv, sim_from_csv};
use delaylab_core::sweep::parse_csv;
use delaylab_core::{AnalyticReport, SimReport, SweepResult};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_delaylab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn analyze_defaults_emits_full_report() {
    let out = run(&["analyze"]);
    assert_eq!(code(&out), 0);
    let report: AnalyticReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.p_s > 0.0 && report.p_s < 1.0);
    assert!(report.t_m_s.is_some() && report.jitter_s2.is_some());
    assert_eq!(
        report.t_m_s.unwrap(),
        report.e_tt_s + report.e_tw_s.unwrap()
    );
}

#[test]
fn analyze_zero_arrivals_has_no_queueing() {
    let out = run(&["analyze", "--set", "arrival_rate_pps=0"]);
    assert_eq!(code(&out), 0);
    let report: AnalyticReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.e_tw_s, Some(0.0));
    assert_eq!(report.t_m_s, Some(report.e_tt_s));
}

#[test]
fn analyze_rejects_alpha_two_by_name() {
    let out = run(&["analyze", "--set", "path_loss_exponent=2"]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("path_loss_exponent"), "{stderr}");
}

#[test]
fn analyze_unstable_exits_two_with_transmission_metrics() {
    let out = run(&["analyze", "--set", "arrival_rate_pps=1e7"]);
    assert_eq!(code(&out), 2);
    let report: AnalyticReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.t_m_s.is_none());
    assert!(report.p_s > 0.0);
    assert!(report.rho >= 1.0);
}

#[test]
fn analyze_csv_round_trips() {
    let out = run(&["analyze", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    let parsed = analytic_from_csv(&csv).unwrap();
    let json_out = run(&["analyze"]);
    let report: AnalyticReport = serde_json::from_str(&stdout(&json_out)).unwrap();
    assert_eq!(parsed, report);
}

#[test]
fn simulate_fixed_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec![
            "simulate".to_string(),
            "--packets".into(),
            "20000".into(),
            "--warmup".into(),
            "2000".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    assert_eq!(code(&bin().args(args(&a)).output().unwrap()), 0);
    assert_eq!(code(&bin().args(args(&b)).output().unwrap()), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn simulate_rejects_warmup_longer_than_run() {
    let out = run(&["simulate", "--packets", "1000", "--warmup", "2000"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_ci_covers_analytic_success_probability() {
    let out = run(&[
        "simulate",
        "--packets",
        "60000",
        "--warmup",
        "5000",
        "--seed",
        "9",
    ]);
    assert_eq!(code(&out), 0);
    let sim: SimReport = serde_json::from_str(&stdout(&out)).unwrap();
    let analytic: AnalyticReport = serde_json::from_str(&stdout(&run(&["analyze"]))).unwrap();
    assert!(
        (sim.p_s_hat - analytic.p_s).abs() <= sim.p_s_ci,
        "sim {} +/- {} vs analytic {}",
        sim.p_s_hat,
        sim.p_s_ci,
        analytic.p_s
    );
}

#[test]
fn simulate_csv_round_trips() {
    let out = run(&[
        "simulate",
        "--packets",
        "5000",
        "--warmup",
        "500",
        "--seed",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let report = sim_from_csv(&stdout(&out)).unwrap();
    let json = run(&[
        "simulate",
        "--packets",
        "5000",
        "--warmup",
        "500",
        "--seed",
        "3",
    ]);
    let expected: SimReport = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(report, expected);
}

fn write_sweep_config(dir: &Path, with_sim: bool) -> std::path::PathBuf {
    let path = dir.join("config.json");
    let body = if with_sim {
        r#"{
  "arrival_rate_pps": 800,
  "sim": {"n_packets": 8000, "warmup": 1000, "seed": 11, "replications": 1},
  "sweep": {
    "axis1": {"field": "packet_bits", "values": [50, 250]},
    "axis2": {"field": "n_machines", "values": [10, 100]}
  }
}"#
    } else {
        r#"{
  "arrival_rate_pps": 800,
  "sweep": {
    "axis1": {"field": "packet_bits", "values": [50, 250]},
    "axis2": {"field": "n_machines", "values": [10, 100]}
  }
}"#
    };
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn sweep_writes_parseable_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(dir.path(), true);
    let csv_path = dir.path().join("sweep.csv");
    let json_path = dir.path().join("sweep.json");

    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let records = parse_csv(&fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.p_s_sim.is_some()));

    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let result: SweepResult =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(result.csv_records(), records, "JSON mirrors the CSV rows");
}

#[test]
fn sweep_rejects_empty_axis() {
    let out = run(&[
        "sweep",
        "--set",
        "sweep.axis1.field=\"packet_bits\"",
        "--set",
        "sweep.axis1.values=[]",
        "--set",
        "sweep.axis2.field=\"n_machines\"",
        "--set",
        "sweep.axis2.values=[10]",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn validate_from_rejects_analytic_only_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(dir.path(), false);
    let json_path = dir.path().join("nosim.json");
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&["validate", "--from", json_path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("no cell carries simulation data"));
}

#[test]
fn validate_from_accepts_simulated_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_sweep_config(dir.path(), true);
    let json_path = dir.path().join("sim.json");
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&["validate", "--from", json_path.to_str().unwrap()]);
    assert!(stdout(&out).starts_with("agreement:"));
}

#[test]
fn flag_overrides_file_overrides_default() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"arrival_rate_pps": 50}"#).unwrap();

    // file beats default
    let out = run(&["analyze", "--config", config.to_str().unwrap()]);
    let report: AnalyticReport = serde_json::from_str(&stdout(&out)).unwrap();
    let rho_file = report.rho;

    // --set beats file
    let out = run(&[
        "analyze",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "arrival_rate_pps=100",
    ]);
    let report: AnalyticReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((report.rho - 2.0 * rho_file).abs() < 1e-12 * report.rho);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"bandwith_hz": 1e8}"#).unwrap();
    let out = run(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("bandwith_hz"));
}
