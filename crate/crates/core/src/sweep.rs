//! Grid evaluation over two scenario axes with agreement diagnostics.
//!
//! Each cell evaluates the closed forms and, when simulation is enabled,
//! pools replicated queue runs and flags whether each analytic metric lands
//! inside the simulated 95% interval. Cells run in parallel with
//! deterministic per-cell seeds, so concurrent and sequential execution
//! produce identical results.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{analyze_scenario, AnalyticError, AnalyticReport, TwVarianceMode};
use crate::montecarlo::{
    run_queue_replicated, GeometrySettings, QueueConfig, ServiceModel, SimError, SimReport,
};
use crate::rng::derive_seed;
use crate::scenario::{ConfigError, ScenarioParams};
use crate::DispersionMode;

/// Sweep failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("axis field invalid: {0}")]
    InvalidAxis(#[from] ConfigError),
    #[error("axis `{0}` has no values")]
    EmptyAxis(String),
    #[error("axis `{0}` values must be strictly increasing")]
    AxisNotIncreasing(String),
    #[error("no cell carries simulation data")]
    NoSimulationData,
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
}

/// One sweep axis: a scenario field name plus the values to visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub field: String,
    pub values: Vec<f64>,
}

/// Simulation settings per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub n_packets: u64,
    pub warmup: u64,
    pub seed: u64,
    pub replications: u32,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            n_packets: 110_000,
            warmup: 10_000,
            seed: 0,
            replications: 1,
        }
    }
}

/// Model-variant flags threaded through a sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModeFlags {
    pub dispersion: DispersionMode,
    pub tw_variance: TwVarianceMode,
    pub exclusion_zone: bool,
    pub frozen_topology: bool,
}

/// Full sweep description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ScenarioParams,
    pub axis1: AxisSpec,
    pub axis2: AxisSpec,
    /// `None` disables simulation: cells carry analytic metrics only.
    pub sim: Option<SimSettings>,
    #[serde(default)]
    pub modes: ModeFlags,
}

/// Within-CI booleans per compared metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementFlags {
    pub p_s: bool,
    pub e_tt: bool,
    pub e_tw: bool,
    pub t_m: bool,
    pub jitter: bool,
}

/// One grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1_value: f64,
    pub axis2_value: f64,
    pub analytic: AnalyticReport,
    pub sim: Option<SimReport>,
    pub agreement: Option<AgreementFlags>,
    /// False marks an unstable queue: analytic queue metrics unavailable.
    pub stable: bool,
    /// Seed this cell's simulation used; rerunning the cell standalone with
    /// it reproduces the row.
    pub seed: u64,
}

/// Grid results in lexicographic (axis1, axis2) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1_field: String,
    pub axis2_field: String,
    pub rows: Vec<SweepRow>,
}

fn check_axis(axis: &AxisSpec, base: &ScenarioParams) -> Result<(), SweepError> {
    if axis.values.is_empty() {
        return Err(SweepError::EmptyAxis(axis.field.clone()));
    }
    if axis.values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SweepError::AxisNotIncreasing(axis.field.clone()));
    }
    // probe the field name against the first value
    base.with_field(&axis.field, axis.values[0])?;
    Ok(())
}

fn evaluate_cell(spec: &SweepSpec, index: usize, v1: f64, v2: f64) -> Result<SweepRow, SweepError> {
    let params = spec
        .base
        .with_field(&spec.axis1.field, v1)?
        .with_field(&spec.axis2.field, v2)?;
    let analytic = analyze_scenario(&params, spec.modes.tw_variance)?;
    let stable = analytic.t_m_s.is_some();

    let (sim, agreement, seed) = match &spec.sim {
        Some(settings) => {
            let seed = derive_seed(settings.seed, index as u64);
            let cfg = QueueConfig {
                n_packets: settings.n_packets,
                warmup: settings.warmup,
                seed,
                service: ServiceModel::Physical,
                dispersion: spec.modes.dispersion,
                geometry: GeometrySettings {
                    exclusion_zone: spec.modes.exclusion_zone,
                    frozen_topology: spec.modes.frozen_topology,
                },
                window_tail_tol: QueueConfig::default().window_tail_tol,
            };
            let report = run_queue_replicated(&params, &cfg, settings.replications)?;
            let agreement = agreement_flags(&analytic, &report);
            (Some(report), Some(agreement), seed)
        }
        None => (None, None, 0),
    };

    Ok(SweepRow {
        axis1_value: v1,
        axis2_value: v2,
        analytic,
        sim,
        agreement,
        stable,
        seed,
    })
}

fn within(value: f64, center: f64, half_width: f64) -> bool {
    (value - center).abs() <= half_width
}

fn agreement_flags(analytic: &AnalyticReport, sim: &SimReport) -> AgreementFlags {
    AgreementFlags {
        p_s: within(analytic.p_s, sim.p_s_hat, sim.p_s_ci),
        e_tt: within(analytic.e_tt_s, sim.mean_service_s, sim.mean_service_ci_s),
        e_tw: analytic
            .e_tw_s
            .map(|v| within(v, sim.mean_wait_s, sim.mean_wait_ci_s))
            .unwrap_or(false),
        t_m: analytic
            .t_m_s
            .map(|v| within(v, sim.mean_delay_s, sim.mean_delay_ci_s))
            .unwrap_or(false),
        jitter: analytic
            .jitter_s2
            .map(|v| within(v, sim.var_delay_s2, sim.var_delay_ci_s2))
            .unwrap_or(false),
    }
}

/// Run the sweep, in parallel across cells.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    run_sweep_with(spec, true)
}

/// Run the sweep with explicit execution mode; sequential and parallel
/// produce identical content.
pub fn run_sweep_with(spec: &SweepSpec, parallel: bool) -> Result<SweepResult, SweepError> {
    check_axis(&spec.axis1, &spec.base)?;
    check_axis(&spec.axis2, &spec.base)?;
    let cells: Vec<(usize, f64, f64)> = spec
        .axis1
        .values
        .iter()
        .flat_map(|&v1| spec.axis2.values.iter().map(move |&v2| (v1, v2)))
        .enumerate()
        .map(|(i, (v1, v2))| (i, v1, v2))
        .collect();

    let rows: Result<Vec<SweepRow>, SweepError> = if parallel {
        cells
            .par_iter()
            .map(|&(i, v1, v2)| evaluate_cell(spec, i, v1, v2))
            .collect()
    } else {
        cells
            .iter()
            .map(|&(i, v1, v2)| evaluate_cell(spec, i, v1, v2))
            .collect()
    };

    Ok(SweepResult {
        axis1_field: spec.axis1.field.clone(),
        axis2_field: spec.axis2.field.clone(),
        rows: rows?,
    })
}

// ============================================================================
// Agreement summary
// ============================================================================

/// Pass counts for one metric across simulated cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricAgreement {
    pub passed: usize,
    pub total: usize,
}

/// Per-metric agreement across a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSummary {
    pub p_s: MetricAgreement,
    pub e_tt: MetricAgreement,
    pub e_tw: MetricAgreement,
    pub t_m: MetricAgreement,
    pub jitter: MetricAgreement,
    /// Fraction of (cell, metric) checks that passed.
    pub pass_fraction: f64,
    /// Cells failing the most metrics, worst first: (axis1, axis2, failures).
    pub worst_cells: Vec<(f64, f64, usize)>,
}

/// Count, per metric, how often the analytic value sits inside the
/// simulated 95% interval. Errors when no cell carries simulation data.
pub fn agreement_summary(result: &SweepResult) -> Result<AgreementSummary, SweepError> {
    let flagged: Vec<(&SweepRow, AgreementFlags)> = result
        .rows
        .iter()
        .filter_map(|row| row.agreement.map(|f| (row, f)))
        .collect();
    if flagged.is_empty() {
        return Err(SweepError::NoSimulationData);
    }
    let tally = |pick: fn(&AgreementFlags) -> bool| MetricAgreement {
        passed: flagged.iter().filter(|(_, f)| pick(f)).count(),
        total: flagged.len(),
    };
    let p_s = tally(|f| f.p_s);
    let e_tt = tally(|f| f.e_tt);
    let e_tw = tally(|f| f.e_tw);
    let t_m = tally(|f| f.t_m);
    let jitter = tally(|f| f.jitter);

    let passed_total = p_s.passed + e_tt.passed + e_tw.passed + t_m.passed + jitter.passed;
    let checks_total = 5 * flagged.len();

    let mut worst: Vec<(f64, f64, usize)> = flagged
        .iter()
        .map(|(row, f)| {
            let failures = [f.p_s, f.e_tt, f.e_tw, f.t_m, f.jitter]
                .iter()
                .filter(|&&ok| !ok)
                .count();
            (row.axis1_value, row.axis2_value, failures)
        })
        .filter(|&(_, _, failures)| failures > 0)
        .collect();
    worst.sort_by(|a, b| {
        b.2.cmp(&a.2)
            .then(a.0.total_cmp(&b.0))
            .then(a.1.total_cmp(&b.1))
    });
    worst.truncate(5);

    Ok(AgreementSummary {
        p_s,
        e_tt,
        e_tw,
        t_m,
        jitter,
        pass_fraction: passed_total as f64 / checks_total as f64,
        worst_cells: worst,
    })
}

// ============================================================================
// CSV contract
// ============================================================================

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 15] = [
    "axis1",
    "axis2",
    "p_s_analytic",
    "p_s_sim",
    "p_s_ci",
    "e_tt",
    "t_m_analytic",
    "t_m_sim",
    "t_m_ci",
    "jitter_analytic",
    "jitter_sim",
    "jitter_ci",
    "rho",
    "stable",
    "seed",
];

/// The subset of a row that the CSV contract carries. Simulation columns
/// are empty when the cell ran analytic-only; queue columns are empty for
/// unstable cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub axis1: f64,
    pub axis2: f64,
    pub p_s_analytic: f64,
    pub p_s_sim: Option<f64>,
    pub p_s_ci: Option<f64>,
    pub e_tt: f64,
    pub t_m_analytic: Option<f64>,
    pub t_m_sim: Option<f64>,
    pub t_m_ci: Option<f64>,
    pub jitter_analytic: Option<f64>,
    pub jitter_sim: Option<f64>,
    pub jitter_ci: Option<f64>,
    pub rho: f64,
    pub stable: bool,
    pub seed: u64,
}

impl SweepResult {
    pub fn csv_records(&self) -> Vec<CsvRecord> {
        self.rows
            .iter()
            .map(|row| CsvRecord {
                axis1: row.axis1_value,
                axis2: row.axis2_value,
                p_s_analytic: row.analytic.p_s,
                p_s_sim: row.sim.as_ref().map(|s| s.p_s_hat),
                p_s_ci: row.sim.as_ref().map(|s| s.p_s_ci),
                e_tt: row.analytic.e_tt_s,
                t_m_analytic: row.analytic.t_m_s,
                t_m_sim: row.sim.as_ref().map(|s| s.mean_delay_s),
                t_m_ci: row.sim.as_ref().map(|s| s.mean_delay_ci_s),
                jitter_analytic: row.analytic.jitter_s2,
                jitter_sim: row.sim.as_ref().map(|s| s.var_delay_s2),
                jitter_ci: row.sim.as_ref().map(|s| s.var_delay_ci_s2),
                rho: row.analytic.rho,
                stable: row.stable,
                seed: row.seed,
            })
            .collect()
    }

    /// Serialize to the fixed-column CSV contract. Floats carry 17
    /// significant digits so parsing reproduces them bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in self.csv_records() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_f64(r.axis1),
                fmt_f64(r.axis2),
                fmt_f64(r.p_s_analytic),
                fmt_opt(r.p_s_sim),
                fmt_opt(r.p_s_ci),
                fmt_f64(r.e_tt),
                fmt_opt(r.t_m_analytic),
                fmt_opt(r.t_m_sim),
                fmt_opt(r.t_m_ci),
                fmt_opt(r.jitter_analytic),
                fmt_opt(r.jitter_sim),
                fmt_opt(r.jitter_ci),
                fmt_f64(r.rho),
                r.stable,
                r.seed
            ));
        }
        out
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Parse the CSV contract back into records.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>, SweepError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(SweepError::CsvParse {
        line: 0,
        message: "empty file".into(),
    })?;
    if header.trim() != CSV_COLUMNS.join(",") {
        return Err(SweepError::CsvParse {
            line: 1,
            message: format!("unexpected header `{header}`"),
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != CSV_COLUMNS.len() {
            return Err(SweepError::CsvParse {
                line: idx + 1,
                message: format!(
                    "expected {} fields, found {}",
                    CSV_COLUMNS.len(),
                    fields.len()
                ),
            });
        }
        let f = |i: usize| -> Result<f64, SweepError> {
            fields[i].parse().map_err(|e| SweepError::CsvParse {
                line: idx + 1,
                message: format!("field `{}`: {e}", CSV_COLUMNS[i]),
            })
        };
        let opt = |i: usize| -> Result<Option<f64>, SweepError> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                f(i).map(Some)
            }
        };
        records.push(CsvRecord {
            axis1: f(0)?,
            axis2: f(1)?,
            p_s_analytic: f(2)?,
            p_s_sim: opt(3)?,
            p_s_ci: opt(4)?,
            e_tt: f(5)?,
            t_m_analytic: opt(6)?,
            t_m_sim: opt(7)?,
            t_m_ci: opt(8)?,
            jitter_analytic: opt(9)?,
            jitter_sim: opt(10)?,
            jitter_ci: opt(11)?,
            rho: f(12)?,
            stable: fields[13].parse().map_err(|e| SweepError::CsvParse {
                line: idx + 1,
                message: format!("field `stable`: {e}"),
            })?,
            seed: fields[14].parse().map_err(|e| SweepError::CsvParse {
                line: idx + 1,
                message: format!("field `seed`: {e}"),
            })?,
        });
    }
    Ok(records)
}
