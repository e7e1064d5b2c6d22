//! Delay-performance laboratory for downlink short-packet machine networks.
//!
//! A base-station field modeled as a planar Poisson point process serves
//! machines over orthogonal sub-bands with Rayleigh fading and a
//! finite-blocklength rate law; packets queue at the serving station as an
//! M/G/1 system with deadline-truncated service. This crate evaluates the
//! closed-form delay metrics of that model (transmission success
//! probability, expected delay, delay jitter) and validates them against an
//! independent Monte Carlo path:
//!
//! - [`scenario`] — parameter set, unit normalization, validation
//! - [`math`] — Gaussian tail / inverse Q-function, adaptive quadrature
//! - [`analytic`] — rate law, delay CDF, truncated moments, queueing metrics
//! - [`montecarlo`] — SINR field sampling and the discrete-event queue
//! - [`sweep`] — grid evaluation with agreement diagnostics, CSV/JSON output
//! - [`validation`] — the built-in acceptance checks behind `validate`

pub mod analytic;
pub mod math;
pub mod montecarlo;
pub mod rng;
pub mod scenario;
pub mod sweep;
pub mod validation;

pub use analytic::{
    analyze_scenario, delay_cdf, expected_delay, expected_queuing_delay, fbl_rate, jitter,
    q_inverse, sinr_threshold, success_probability, transmission_report, truncated_moment,
    AnalyticError, AnalyticReport, DelayCdf, DelaySummary, DispersionMode, TwVarianceMode,
};
pub use montecarlo::{
    choose_window_radius, run_queue, run_queue_replicated, sample_field, sample_service_time,
    FieldSampler, GeometrySettings, QueueConfig, ServiceModel, SimError, SimReport,
};
pub use scenario::{normalize_config, utilization, ConfigError, RawScenarioConfig, ScenarioParams};
pub use sweep::{
    agreement_summary, run_sweep, run_sweep_with, AgreementFlags, AgreementSummary, AxisSpec,
    CsvRecord, ModeFlags, SimSettings, SweepError, SweepResult, SweepRow, SweepSpec,
};
