//! Report serialization: JSON (default) and single-row CSV, both lossless.
//!
//! Floats are written with 17 significant digits in CSV and with serde's
//! shortest-round-trip form in JSON, so parsing an emitted file reproduces
//! the in-memory record exactly.

use delaylab_core::sweep::fmt_f64;
use delaylab_core::{AnalyticReport, SimReport};

pub const ANALYTIC_COLUMNS: [&str; 10] = [
    "p_s",
    "e_tt_s",
    "e_tt2_s2",
    "e_tt3_s3",
    "e_tw_s",
    "t_m_s",
    "var_tt_s2",
    "var_tw_s2",
    "jitter_s2",
    "rho",
];

pub const SIM_COLUMNS: [&str; 17] = [
    "n_packets",
    "seed",
    "p_s_hat",
    "p_s_ci",
    "mean_delay_s",
    "mean_delay_ci_s",
    "var_delay_s2",
    "var_delay_ci_s2",
    "mean_wait_s",
    "mean_wait_ci_s",
    "var_wait_s2",
    "var_wait_ci_s2",
    "mean_service_s",
    "mean_service_ci_s",
    "little_l",
    "rho_hat",
    "unstable",
];

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn analytic_to_json(report: &AnalyticReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn analytic_to_csv(report: &AnalyticReport) -> String {
    format!(
        "{}\n{},{},{},{},{},{},{},{},{},{}\n",
        ANALYTIC_COLUMNS.join(","),
        fmt_f64(report.p_s),
        fmt_f64(report.e_tt_s),
        fmt_f64(report.e_tt2_s2),
        fmt_f64(report.e_tt3_s3),
        opt(report.e_tw_s),
        opt(report.t_m_s),
        fmt_f64(report.var_tt_s2),
        opt(report.var_tw_s2),
        opt(report.jitter_s2),
        fmt_f64(report.rho),
    )
}

pub fn sim_to_json(report: &SimReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn sim_to_csv(report: &SimReport) -> String {
    format!(
        "{}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        SIM_COLUMNS.join(","),
        report.n_packets,
        report.seed,
        fmt_f64(report.p_s_hat),
        fmt_f64(report.p_s_ci),
        fmt_f64(report.mean_delay_s),
        fmt_f64(report.mean_delay_ci_s),
        fmt_f64(report.var_delay_s2),
        fmt_f64(report.var_delay_ci_s2),
        fmt_f64(report.mean_wait_s),
        fmt_f64(report.mean_wait_ci_s),
        fmt_f64(report.var_wait_s2),
        fmt_f64(report.var_wait_ci_s2),
        fmt_f64(report.mean_service_s),
        fmt_f64(report.mean_service_ci_s),
        fmt_f64(report.little_l),
        fmt_f64(report.rho_hat),
        report.unstable,
    )
}

/// Parse the analytic CSV back; the round-trip must be exact.
pub fn analytic_from_csv(text: &str) -> Result<AnalyticReport, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?;
    if header != ANALYTIC_COLUMNS.join(",") {
        return Err(format!("unexpected header `{header}`"));
    }
    let row = lines.next().ok_or("missing data row")?;
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != ANALYTIC_COLUMNS.len() {
        return Err(format!("expected {} fields", ANALYTIC_COLUMNS.len()));
    }
    let f = |i: usize| -> Result<f64, String> {
        fields[i]
            .parse()
            .map_err(|e| format!("{}: {e}", ANALYTIC_COLUMNS[i]))
    };
    let o = |i: usize| -> Result<Option<f64>, String> {
        if fields[i].is_empty() {
            Ok(None)
        } else {
            f(i).map(Some)
        }
    };
    Ok(AnalyticReport {
        p_s: f(0)?,
        e_tt_s: f(1)?,
        e_tt2_s2: f(2)?,
        e_tt3_s3: f(3)?,
        e_tw_s: o(4)?,
        t_m_s: o(5)?,
        var_tt_s2: f(6)?,
        var_tw_s2: o(7)?,
        jitter_s2: o(8)?,
        rho: f(9)?,
    })
}

/// Parse the simulation CSV back; the round-trip must be exact.
pub fn sim_from_csv(text: &str) -> Result<SimReport, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?;
    if header != SIM_COLUMNS.join(",") {
        return Err(format!("unexpected header `{header}`"));
    }
    let row = lines.next().ok_or("missing data row")?;
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != SIM_COLUMNS.len() {
        return Err(format!("expected {} fields", SIM_COLUMNS.len()));
    }
    let f = |i: usize| -> Result<f64, String> {
        fields[i]
            .parse()
            .map_err(|e| format!("{}: {e}", SIM_COLUMNS[i]))
    };
    Ok(SimReport {
        n_packets: fields[0].parse().map_err(|e| format!("n_packets: {e}"))?,
        seed: fields[1].parse().map_err(|e| format!("seed: {e}"))?,
        p_s_hat: f(2)?,
        p_s_ci: f(3)?,
        mean_delay_s: f(4)?,
        mean_delay_ci_s: f(5)?,
        var_delay_s2: f(6)?,
        var_delay_ci_s2: f(7)?,
        mean_wait_s: f(8)?,
        mean_wait_ci_s: f(9)?,
        var_wait_s2: f(10)?,
        var_wait_ci_s2: f(11)?,
        mean_service_s: f(12)?,
        mean_service_ci_s: f(13)?,
        little_l: f(14)?,
        rho_hat: f(15)?,
        unstable: fields[16].parse().map_err(|e| format!("unstable: {e}"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use delaylab_core::{analyze_scenario, ScenarioParams, TwVarianceMode};

    fn sample_analytic() -> AnalyticReport {
        analyze_scenario(&ScenarioParams::defaults(), TwVarianceMode::Standard).unwrap()
    }

    #[test]
    fn analytic_csv_round_trip_is_exact() {
        let report = sample_analytic();
        let parsed = analytic_from_csv(&analytic_to_csv(&report)).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn analytic_json_round_trip_is_exact() {
        let report = sample_analytic();
        let parsed: AnalyticReport = serde_json::from_str(&analytic_to_json(&report)).unwrap();
        assert_eq!(parsed, report);
    }

    #[test]
    fn unstable_report_keeps_empty_csv_fields() {
        let p = ScenarioParams::defaults()
            .with_field("arrival_rate_pps", 1e7)
            .unwrap();
        let report = analyze_scenario(&p, TwVarianceMode::Standard).unwrap();
        let csv = analytic_to_csv(&report);
        let parsed = analytic_from_csv(&csv).unwrap();
        assert_eq!(parsed, report);
        assert!(parsed.t_m_s.is_none());
        assert!(csv.lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn sim_round_trips_are_exact() {
        use delaylab_core::{run_queue, QueueConfig};
        let cfg = QueueConfig {
            n_packets: 3000,
            warmup: 300,
            seed: 5,
            ..QueueConfig::default()
        };
        let report = run_queue(&ScenarioParams::defaults(), &cfg).unwrap();
        assert_eq!(sim_from_csv(&sim_to_csv(&report)).unwrap(), report);
        let parsed: SimReport = serde_json::from_str(&sim_to_json(&report)).unwrap();
        assert_eq!(parsed, report);
    }
}
