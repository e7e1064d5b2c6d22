//! `delaylab`: closed-form delay metrics for downlink short-packet machine
//! networks, with a Monte Carlo cross-check.
//!
//! Exit codes: 0 success, 1 config error, 2 unstable queue (analyze),
//! 3 validation failure.

use delaylab::{config, output};

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delaylab_core::sweep::parse_csv;
use delaylab_core::validation;
use delaylab_core::{
    agreement_summary, analyze_scenario, run_queue_replicated, run_sweep, AgreementSummary,
    DispersionMode, GeometrySettings, ModeFlags, QueueConfig, ServiceModel, SimSettings,
    SweepResult, SweepSpec, TwVarianceMode,
};

use config::LoadedConfig;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "delaylab",
    version,
    about = "Delay metrics for downlink short-packet machine networks: closed forms plus Monte Carlo validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON scenario config; missing fields take the documented defaults
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config key (dotted path), e.g. --set arrival_rate_pps=0
    /// or --set sim.n_packets=50000; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write output here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; analyze/simulate default to json, sweep to csv
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Progress notes on stderr
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// RNG seed (fixed default keeps runs reproducible)
    #[arg(long)]
    seed: Option<u64>,
    /// Packets per replication, including warmup
    #[arg(long)]
    packets: Option<u64>,
    /// Leading packets excluded from statistics
    #[arg(long)]
    warmup: Option<u64>,
    /// Independent replications to pool
    #[arg(long)]
    replications: Option<u32>,
    /// Rate law handed to the simulator
    #[arg(long = "mode-dispersion", value_enum)]
    dispersion: Option<DispersionArg>,
    /// Scatter interferers only beyond the serving distance (sensitivity)
    #[arg(long = "exclusion-zone")]
    exclusion_zone: bool,
    /// Freeze interferer positions across packets (sensitivity)
    #[arg(long = "frozen-topology")]
    frozen_topology: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DispersionArg {
    Approx,
    Exact,
}

impl From<DispersionArg> for DispersionMode {
    fn from(v: DispersionArg) -> Self {
        match v {
            DispersionArg::Approx => DispersionMode::Approx,
            DispersionArg::Exact => DispersionMode::Exact,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TwVarArg {
    Standard,
    PaperLiteral,
}

impl From<TwVarArg> for TwVarianceMode {
    fn from(v: TwVarArg) -> Self {
        match v {
            TwVarArg::Standard => TwVarianceMode::Standard,
            TwVarArg::PaperLiteral => TwVarianceMode::PaperLiteral,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form metrics for one scenario
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Waiting-variance formula variant
        #[arg(long = "mode-twvar", value_enum)]
        tw_variance: Option<TwVarArg>,
    },
    /// Run the discrete-event queue simulation for one scenario
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Evaluate a two-axis grid, optionally with per-cell simulation
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Waiting-variance formula variant
        #[arg(long = "mode-twvar", value_enum)]
        tw_variance: Option<TwVarArg>,
    },
    /// Run the built-in acceptance checks, or summarize a sweep output
    Validate {
        /// Acceptance seed (fixed default)
        #[arg(long)]
        seed: Option<u64>,
        /// Summarize an existing sweep JSON instead of running the checks
        #[arg(long, value_name = "SWEEP_JSON")]
        from: Option<PathBuf>,
        /// Progress notes on stderr
        #[arg(short, long)]
        verbose: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Analyze {
            common,
            tw_variance,
        } => cmd_analyze(common, tw_variance),
        Command::Simulate { common, sim } => cmd_simulate(common, sim),
        Command::Sweep {
            common,
            sim,
            tw_variance,
        } => cmd_sweep(common, sim, tw_variance),
        Command::Validate {
            seed,
            from,
            verbose,
        } => cmd_validate(seed, from, verbose),
    }
}

fn load_config(common: &CommonArgs) -> Result<LoadedConfig, String> {
    config::load(common.config.as_deref(), &common.overrides).map_err(|e| e.to_string())
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            if common.verbose {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_analyze(common: CommonArgs, tw_variance: Option<TwVarArg>) -> Result<u8, String> {
    let cfg = load_config(&common)?;
    let mode = tw_variance
        .map(TwVarianceMode::from)
        .unwrap_or_else(|| cfg.mode_flags().tw_variance);
    let report = analyze_scenario(&cfg.params, mode).map_err(|e| e.to_string())?;
    let unstable = report.t_m_s.is_none();
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => output::analytic_to_json(&report),
        Format::Csv => output::analytic_to_csv(&report),
    };
    emit(&common, &text)?;
    if unstable {
        eprintln!(
            "queue unstable (rho = {:.6}): queue metrics unavailable, transmission metrics emitted",
            report.rho
        );
        Ok(EXIT_UNSTABLE)
    } else {
        Ok(EXIT_OK)
    }
}

fn queue_config(cfg: &LoadedConfig, sim: &SimArgs) -> QueueConfig {
    let settings = cfg.sim_settings();
    let modes = cfg.mode_flags();
    QueueConfig {
        n_packets: sim.packets.unwrap_or(settings.n_packets),
        warmup: sim.warmup.unwrap_or(settings.warmup),
        seed: sim.seed.unwrap_or(settings.seed),
        service: ServiceModel::Physical,
        dispersion: sim
            .dispersion
            .map(DispersionMode::from)
            .unwrap_or(modes.dispersion),
        geometry: GeometrySettings {
            exclusion_zone: sim.exclusion_zone || modes.exclusion_zone,
            frozen_topology: sim.frozen_topology || modes.frozen_topology,
        },
        window_tail_tol: QueueConfig::default().window_tail_tol,
    }
}

fn cmd_simulate(common: CommonArgs, sim: SimArgs) -> Result<u8, String> {
    let cfg = load_config(&common)?;
    let queue_cfg = queue_config(&cfg, &sim);
    let replications = sim
        .replications
        .unwrap_or_else(|| cfg.sim_settings().replications);
    if common.verbose {
        eprintln!(
            "simulating {} packets x {} replications (seed {})",
            queue_cfg.n_packets, replications, queue_cfg.seed
        );
    }
    let report =
        run_queue_replicated(&cfg.params, &queue_cfg, replications).map_err(|e| e.to_string())?;
    let text = match common.format.unwrap_or(Format::Json) {
        Format::Json => output::sim_to_json(&report),
        Format::Csv => output::sim_to_csv(&report),
    };
    emit(&common, &text)?;
    Ok(EXIT_OK)
}

fn cmd_sweep(
    common: CommonArgs,
    sim: SimArgs,
    tw_variance: Option<TwVarArg>,
) -> Result<u8, String> {
    let cfg = load_config(&common)?;
    let Some(section) = cfg.sweep.clone() else {
        return Err("sweep requires a `sweep` section (axis1/axis2) in the config".into());
    };
    let mut modes: ModeFlags = cfg.mode_flags();
    if let Some(d) = sim.dispersion {
        modes.dispersion = d.into();
    }
    if let Some(tw) = tw_variance {
        modes.tw_variance = tw.into();
    }
    modes.exclusion_zone |= sim.exclusion_zone;
    modes.frozen_topology |= sim.frozen_topology;

    // simulation runs when the config has a sim section or any sim flag is given
    let sim_enabled = cfg.sim.is_some()
        || sim.packets.is_some()
        || sim.warmup.is_some()
        || sim.seed.is_some()
        || sim.replications.is_some();
    let settings = cfg.sim_settings();
    let spec = SweepSpec {
        base: cfg.params.clone(),
        axis1: section.axis1,
        axis2: section.axis2,
        sim: sim_enabled.then(|| SimSettings {
            n_packets: sim.packets.unwrap_or(settings.n_packets),
            warmup: sim.warmup.unwrap_or(settings.warmup),
            seed: sim.seed.unwrap_or(settings.seed),
            replications: sim.replications.unwrap_or(settings.replications),
        }),
        modes,
    };
    if common.verbose {
        eprintln!(
            "sweeping {} x {} cells (sim: {})",
            spec.axis1.values.len(),
            spec.axis2.values.len(),
            if sim_enabled { "on" } else { "off" }
        );
    }
    let result = run_sweep(&spec).map_err(|e| e.to_string())?;
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => result.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&result).expect("result serializes");
            s.push('\n');
            s
        }
    };
    emit(&common, &text)?;
    Ok(EXIT_OK)
}

fn print_agreement(summary: &AgreementSummary) {
    println!(
        "agreement: pass fraction {:.3} | p_s {}/{} e_tt {}/{} e_tw {}/{} t_m {}/{} jitter {}/{}",
        summary.pass_fraction,
        summary.p_s.passed,
        summary.p_s.total,
        summary.e_tt.passed,
        summary.e_tt.total,
        summary.e_tw.passed,
        summary.e_tw.total,
        summary.t_m.passed,
        summary.t_m.total,
        summary.jitter.passed,
        summary.jitter.total,
    );
    for (a1, a2, failures) in &summary.worst_cells {
        println!("  worst cell: axis1={a1} axis2={a2} ({failures} metrics outside)");
    }
}

fn summary_meets_thresholds(summary: &AgreementSummary) -> bool {
    [
        summary.p_s,
        summary.e_tt,
        summary.e_tw,
        summary.t_m,
        summary.jitter,
    ]
    .iter()
    .all(|m| (m.passed as f64) >= validation::AGREEMENT_MIN_FRACTION * m.total as f64)
}

fn cmd_validate(seed: Option<u64>, from: Option<PathBuf>, verbose: bool) -> Result<u8, String> {
    if let Some(path) = from {
        let text = fs::read_to_string(&path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        if path.extension().is_some_and(|e| e == "csv") {
            // CSV carries no per-cell intervals, so it cannot be summarized
            parse_csv(&text).map_err(|e| e.to_string())?;
            return Err(
                "agreement summary needs the JSON sweep output (CSV lacks per-cell reports)".into(),
            );
        }
        let result: SweepResult = serde_json::from_str(&text)
            .map_err(|e| format!("{} is not a sweep result: {e}", path.display()))?;
        let summary = agreement_summary(&result).map_err(|e| e.to_string())?;
        print_agreement(&summary);
        return if summary_meets_thresholds(&summary) {
            Ok(EXIT_OK)
        } else {
            Ok(EXIT_VALIDATION)
        };
    }

    let seed = seed.unwrap_or(validation::DEFAULT_SEED);
    if verbose {
        eprintln!("running acceptance checks with seed {seed:#x}");
    }
    let report = validation::run_acceptance(seed, |outcome| println!("{}", outcome.line()));
    if let Some(summary) = &report.agreement {
        print_agreement(summary);
    }
    let pass = report.all_pass();
    println!(
        "{}",
        if pass {
            "validation: PASS"
        } else {
            "validation: FAIL"
        }
    );
    Ok(if pass { EXIT_OK } else { EXIT_VALIDATION })
}
