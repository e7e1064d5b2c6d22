//! Discrete-event M/G/1 queue with deadline-truncated service.
//!
//! Arrivals are Poisson; each packet's service time comes from a fresh,
//! independent field draw (iid services). A single FCFS server fixes the
//! event order completely, so the simulation tracks exact arrival/start/
//! departure times per packet. Failed packets hold the server for exactly
//! the delay threshold and stay in the delay statistics with
//! `delay = wait + T_th`, matching the truncated-moment conditioning.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::DispersionMode;
use crate::montecarlo::field::{
    choose_window_radius, sample_service_time, FieldSampler, GeometrySettings,
};
use crate::montecarlo::stats;
use crate::rng;
use crate::scenario::ScenarioParams;

/// Simulation failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("n_packets ({n_packets}) must exceed warmup ({warmup})")]
    RunTooShort { n_packets: u64, warmup: u64 },
    #[error("queue simulation requires a positive arrival rate")]
    NoArrivals,
    #[error("replications must be at least 1")]
    NoReplications,
}

/// How service times are generated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub enum ServiceModel {
    /// Physical path: field draw, SINR, finite-blocklength rate, truncation.
    #[default]
    Physical,
    /// Fixed service time in seconds; the M/D/1 regression hook.
    Deterministic(f64),
}

/// One queue run's configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueConfig {
    /// Packets to simulate, including warmup.
    pub n_packets: u64,
    /// Leading packets excluded from statistics.
    pub warmup: u64,
    pub seed: u64,
    pub service: ServiceModel,
    pub dispersion: DispersionMode,
    pub geometry: GeometrySettings,
    /// Tail tolerance handed to [`choose_window_radius`].
    pub window_tail_tol: f64,
}

impl Default for QueueConfig {
    fn default() -> Self {
        QueueConfig {
            n_packets: 210_000,
            warmup: 10_000,
            seed: 0,
            service: ServiceModel::Physical,
            dispersion: DispersionMode::Approx,
            geometry: GeometrySettings::default(),
            window_tail_tol: 1e-4,
        }
    }
}

/// Simulated estimates with 95% half-widths. Delay means include failed
/// packets; `p_s_hat` is the success fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Measured (post-warmup) packets, pooled over replications.
    pub n_packets: u64,
    pub seed: u64,
    pub p_s_hat: f64,
    pub p_s_ci: f64,
    pub mean_delay_s: f64,
    pub mean_delay_ci_s: f64,
    pub var_delay_s2: f64,
    pub var_delay_ci_s2: f64,
    pub mean_wait_s: f64,
    pub mean_wait_ci_s: f64,
    pub var_wait_s2: f64,
    pub var_wait_ci_s2: f64,
    pub mean_service_s: f64,
    pub mean_service_ci_s: f64,
    /// Time-average number of packets in the system over the measurement
    /// window.
    pub little_l: f64,
    /// Offered-load estimate lambda * mean_service.
    pub rho_hat: f64,
    /// Set when the offered-load estimate reaches 1.
    pub unstable: bool,
}

/// Raw per-packet record of one replication.
struct RunTrace {
    arrivals: Vec<f64>,
    departures: Vec<f64>,
    services: Vec<f64>,
    successes: Vec<bool>,
    warmup: usize,
}

fn simulate_once(
    p: &ScenarioParams,
    cfg: &QueueConfig,
    stream_id: u64,
) -> Result<RunTrace, SimError> {
    if cfg.n_packets <= cfg.warmup {
        return Err(SimError::RunTooShort {
            n_packets: cfg.n_packets,
            warmup: cfg.warmup,
        });
    }
    if p.arrival_rate_pps <= 0.0 {
        return Err(SimError::NoArrivals);
    }
    let mut rng = rng::stream(cfg.seed, stream_id);
    let sampler = match cfg.service {
        ServiceModel::Physical => {
            let radius = choose_window_radius(p, cfg.window_tail_tol);
            Some(FieldSampler::new(p, radius, cfg.geometry, &mut rng))
        }
        ServiceModel::Deterministic(_) => None,
    };

    let n = cfg.n_packets as usize;
    let mut arrivals = Vec::with_capacity(n);
    let mut departures = Vec::with_capacity(n);
    let mut services = Vec::with_capacity(n);
    let mut successes = Vec::with_capacity(n);

    let mut clock = 0.0f64;
    let mut server_free = 0.0f64;
    for _ in 0..n {
        // draw order per packet: interarrival, then the service field
        clock += -(1.0 - rng.random::<f64>()).ln() / p.arrival_rate_pps;
        let (service, success) = match (&cfg.service, &sampler) {
            (ServiceModel::Deterministic(d), _) => (*d, *d < p.delay_threshold_s),
            (ServiceModel::Physical, Some(sampler)) => {
                let field = sampler.sample(&mut rng);
                sample_service_time(p, &field, cfg.dispersion)
            }
            (ServiceModel::Physical, None) => unreachable!(),
        };
        let start = clock.max(server_free);
        let depart = start + service;
        server_free = depart;
        arrivals.push(clock);
        departures.push(depart);
        services.push(service);
        successes.push(success);
    }
    Ok(RunTrace {
        arrivals,
        departures,
        services,
        successes,
        warmup: cfg.warmup as usize,
    })
}

impl RunTrace {
    /// Time-average number in system over [first measured arrival, last
    /// departure], counting residual warmup packets that overlap the window.
    fn time_average_occupancy(&self) -> f64 {
        let t_start = self.arrivals[self.warmup];
        let t_end = *self.departures.last().expect("non-empty run");
        let window = t_end - t_start;
        if window <= 0.0 {
            return 0.0;
        }
        let mut area = 0.0;
        for (&a, &d) in self.arrivals.iter().zip(&self.departures) {
            let lo = a.max(t_start);
            let hi = d.min(t_end);
            if hi > lo {
                area += hi - lo;
            }
        }
        area / window
    }
}

/// Pool one or more traces into a report. Batch statistics concatenate
/// across replications; the little-L window areas average with
/// window-length weights.
fn summarize(p: &ScenarioParams, seed: u64, traces: &[RunTrace]) -> SimReport {
    let mut delays = Vec::new();
    let mut waits = Vec::new();
    let mut services = Vec::new();
    let mut successes = 0u64;
    let mut occupancy_weighted = 0.0;
    let mut total_window = 0.0;
    let mut delay_batches = Vec::new();
    let mut delay_var_batches = Vec::new();
    let mut wait_batches = Vec::new();
    let mut wait_var_batches = Vec::new();
    let mut service_batches = Vec::new();

    for trace in traces {
        let w = trace.warmup;
        let d: Vec<f64> = trace.arrivals[w..]
            .iter()
            .zip(&trace.departures[w..])
            .map(|(&a, &dep)| dep - a)
            .collect();
        let s: Vec<f64> = trace.services[w..].to_vec();
        let wt: Vec<f64> = d.iter().zip(&s).map(|(&di, &si)| di - si).collect();
        successes += trace.successes[w..].iter().filter(|&&ok| ok).count() as u64;

        for b in stats::batches(&d) {
            delay_batches.push(stats::mean(b));
            if b.len() >= 2 {
                delay_var_batches.push(stats::variance(b));
            }
        }
        for b in stats::batches(&wt) {
            wait_batches.push(stats::mean(b));
            if b.len() >= 2 {
                wait_var_batches.push(stats::variance(b));
            }
        }
        for b in stats::batches(&s) {
            service_batches.push(stats::mean(b));
        }

        let t_start = trace.arrivals[w];
        let t_end = *trace.departures.last().unwrap();
        let window = t_end - t_start;
        occupancy_weighted += trace.time_average_occupancy() * window;
        total_window += window;

        delays.extend_from_slice(&d);
        waits.extend_from_slice(&wt);
        services.extend_from_slice(&s);
    }

    let n = delays.len() as u64;
    let p_s_hat = if n > 0 {
        successes as f64 / n as f64
    } else {
        0.0
    };
    let mean_service = stats::mean(&services);
    let rho_hat = p.arrival_rate_pps * mean_service;
    SimReport {
        n_packets: n,
        seed,
        p_s_hat,
        p_s_ci: stats::binomial_ci(p_s_hat, n),
        mean_delay_s: stats::mean(&delays),
        mean_delay_ci_s: stats::ci_from_batch_stats(&delay_batches),
        var_delay_s2: stats::variance(&delays),
        var_delay_ci_s2: stats::ci_from_batch_stats(&delay_var_batches),
        mean_wait_s: stats::mean(&waits),
        mean_wait_ci_s: stats::ci_from_batch_stats(&wait_batches),
        var_wait_s2: stats::variance(&waits),
        var_wait_ci_s2: stats::ci_from_batch_stats(&wait_var_batches),
        mean_service_s: mean_service,
        mean_service_ci_s: stats::ci_from_batch_stats(&service_batches),
        little_l: if total_window > 0.0 {
            occupancy_weighted / total_window
        } else {
            0.0
        },
        rho_hat,
        unstable: rho_hat >= 1.0,
    }
}

/// Run one replication (stream 0 of the seed).
pub fn run_queue(p: &ScenarioParams, cfg: &QueueConfig) -> Result<SimReport, SimError> {
    let trace = simulate_once(p, cfg, 0)?;
    Ok(summarize(p, cfg.seed, &[trace]))
}

/// Run `replications` independent replications on streams `0..replications`
/// of the seed and pool them.
pub fn run_queue_replicated(
    p: &ScenarioParams,
    cfg: &QueueConfig,
    replications: u32,
) -> Result<SimReport, SimError> {
    if replications == 0 {
        return Err(SimError::NoReplications);
    }
    let traces: Result<Vec<RunTrace>, SimError> = (0..replications)
        .map(|r| simulate_once(p, cfg, r as u64))
        .collect();
    Ok(summarize(p, cfg.seed, &traces?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analyze_scenario, expected_delay, TwVarianceMode};
    use crate::scenario::ScenarioParams;

    fn base() -> ScenarioParams {
        ScenarioParams::defaults()
    }

    #[test]
    fn run_length_is_validated() {
        let cfg = QueueConfig {
            n_packets: 1000,
            warmup: 2000,
            ..QueueConfig::default()
        };
        assert_eq!(
            run_queue(&base(), &cfg).unwrap_err(),
            SimError::RunTooShort {
                n_packets: 1000,
                warmup: 2000
            }
        );
    }

    #[test]
    fn zero_arrivals_are_rejected() {
        let p = base().with_field("arrival_rate_pps", 0.0).unwrap();
        assert_eq!(
            run_queue(&p, &QueueConfig::default()).unwrap_err(),
            SimError::NoArrivals
        );
    }

    #[test]
    fn determinism_same_seed_same_report() {
        let cfg = QueueConfig {
            n_packets: 5_000,
            warmup: 500,
            seed: 99,
            ..QueueConfig::default()
        };
        let a = run_queue(&base(), &cfg).unwrap();
        let b = run_queue(&base(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = run_queue(&base(), &QueueConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn near_empty_queue_has_negligible_wait() {
        // lambda * E[T_t] < 0.01
        let p = base().with_field("arrival_rate_pps", 10.0).unwrap();
        let cfg = QueueConfig {
            n_packets: 30_000,
            warmup: 1_000,
            seed: 3,
            ..QueueConfig::default()
        };
        let r = run_queue(&p, &cfg).unwrap();
        assert!(
            r.mean_wait_s < 3.0 * r.mean_wait_ci_s + 2e-6,
            "wait {} ci {}",
            r.mean_wait_s,
            r.mean_wait_ci_s
        );
        assert!(!r.unstable);
    }

    #[test]
    fn md1_mean_wait_matches_closed_form() {
        // deterministic service at rho = 0.5
        let d = 5e-4;
        let p = base().with_field("arrival_rate_pps", 1000.0).unwrap();
        let cfg = QueueConfig {
            n_packets: 400_000,
            warmup: 10_000,
            seed: 17,
            service: ServiceModel::Deterministic(d),
            ..QueueConfig::default()
        };
        let r = run_queue(&p, &cfg).unwrap();
        let expected = 1000.0 * d * d / (2.0 * (1.0 - 1000.0 * d));
        let rel = (r.mean_wait_s - expected).abs() / expected;
        assert!(rel < 0.02, "M/D/1 wait off by {:.2}%", rel * 100.0);
        assert_eq!(r.p_s_hat, 1.0); // d < T_th, every packet succeeds
    }

    #[test]
    fn physical_run_matches_analytic_mean_and_variance() {
        // moderate load so queueing matters; agreement bands follow the
        // cross-validation criteria (3% mean, 10% variance)
        let p = base();
        let summary = expected_delay(&p).unwrap();
        let lambda = 0.5 / summary.e_tt_s; // rho = 0.5
        let p = p.with_field("arrival_rate_pps", lambda).unwrap();
        let analytic = analyze_scenario(&p, TwVarianceMode::Standard).unwrap();
        let cfg = QueueConfig {
            n_packets: 220_000,
            warmup: 20_000,
            seed: 5,
            ..QueueConfig::default()
        };
        let r = run_queue(&p, &cfg).unwrap();
        let t_m = analytic.t_m_s.unwrap();
        let jitter = analytic.jitter_s2.unwrap();
        assert!(
            ((r.mean_delay_s - t_m) / t_m).abs() < 0.03,
            "mean delay {} vs analytic {}",
            r.mean_delay_s,
            t_m
        );
        assert!(
            ((r.var_delay_s2 - jitter) / jitter).abs() < 0.10,
            "delay variance {} vs analytic jitter {}",
            r.var_delay_s2,
            jitter
        );
        // success fraction agrees with F(T_th) within four standard errors
        let se = r.p_s_ci / stats::Z_95;
        assert!((r.p_s_hat - analytic.p_s).abs() <= 4.0 * se);
    }

    #[test]
    fn pk_mean_wait_at_default_arrival_rate() {
        // lightly loaded reference scenario against the closed-form mean
        // wait, within four standard errors of the batch-means interval
        let p = base();
        let analytic = analyze_scenario(&p, TwVarianceMode::Standard).unwrap();
        let cfg = QueueConfig {
            n_packets: 210_000,
            warmup: 10_000,
            seed: 13,
            ..QueueConfig::default()
        };
        let r = run_queue(&p, &cfg).unwrap();
        let e_tw = analytic.e_tw_s.unwrap();
        let se = r.mean_wait_ci_s / stats::Z_95;
        assert!(
            (r.mean_wait_s - e_tw).abs() <= 4.0 * se,
            "mean wait {} vs closed form {e_tw} (se {se})",
            r.mean_wait_s
        );
    }

    #[test]
    fn report_fields_are_finite_and_sane() {
        let cfg = QueueConfig {
            n_packets: 8_000,
            warmup: 1_000,
            seed: 23,
            ..QueueConfig::default()
        };
        let r = run_queue(&base(), &cfg).unwrap();
        for v in [
            r.p_s_hat,
            r.p_s_ci,
            r.mean_delay_s,
            r.mean_delay_ci_s,
            r.var_delay_s2,
            r.var_delay_ci_s2,
            r.mean_wait_s,
            r.mean_wait_ci_s,
            r.var_wait_s2,
            r.var_wait_ci_s2,
            r.mean_service_s,
            r.mean_service_ci_s,
            r.little_l,
            r.rho_hat,
        ] {
            assert!(v.is_finite());
        }
        assert!((0.0..=1.0).contains(&r.p_s_hat));
        assert!(r.p_s_ci > 0.0 && r.mean_delay_ci_s > 0.0);
        assert!(r.mean_service_s > 0.0 && r.mean_delay_s >= r.mean_service_s);
    }

    #[test]
    fn littles_law_holds() {
        let p = base();
        let summary = expected_delay(&p).unwrap();
        let lambda = 0.5 / summary.e_tt_s;
        let p = p.with_field("arrival_rate_pps", lambda).unwrap();
        let cfg = QueueConfig {
            n_packets: 120_000,
            warmup: 10_000,
            seed: 21,
            ..QueueConfig::default()
        };
        let r = run_queue(&p, &cfg).unwrap();
        let lw = lambda * r.mean_delay_s;
        assert!(
            ((r.little_l - lw) / lw).abs() < 0.02,
            "L = {} vs lambda W = {}",
            r.little_l,
            lw
        );
    }

    #[test]
    fn sojourn_variance_decomposes() {
        // Var(delay) = Var(wait) + Var(service) when a packet's wait is
        // independent of its own service; check the empirical decomposition
        let p = base();
        let summary = expected_delay(&p).unwrap();
        let lambda = 0.5 / summary.e_tt_s;
        let p = p.with_field("arrival_rate_pps", lambda).unwrap();
        let cfg = QueueConfig {
            n_packets: 220_000,
            warmup: 20_000,
            seed: 31,
            ..QueueConfig::default()
        };
        let trace = simulate_once(&p, &cfg, 0).unwrap();
        let w = trace.warmup;
        let sojourn: Vec<f64> = trace.arrivals[w..]
            .iter()
            .zip(&trace.departures[w..])
            .map(|(&a, &d)| d - a)
            .collect();
        let service = &trace.services[w..];
        let wait: Vec<f64> = sojourn
            .iter()
            .zip(service)
            .map(|(&s, &sv)| s - sv)
            .collect();
        let var_d = stats::variance(&sojourn);
        let var_w = stats::variance(&wait);
        let var_s = stats::variance(service);
        let rel = (var_d - var_w - var_s).abs() / var_d;
        assert!(
            rel < 0.05,
            "decomposition residual {:.2}% of Var(delay)",
            rel * 100.0
        );
    }

    #[test]
    fn exact_dispersion_dominates_approx_pathwise() {
        // the SINR-dependent dispersion never exceeds its limit, so with
        // identical field draws the exact-mode rate is at least the approx
        // rate: services are pointwise shorter and successes more frequent
        let p = base();
        let cfg = QueueConfig {
            n_packets: 30_000,
            warmup: 2_000,
            seed: 77,
            ..QueueConfig::default()
        };
        let approx = run_queue(&p, &cfg).unwrap();
        let exact = run_queue(
            &p,
            &QueueConfig { dispersion: DispersionMode::Exact, ..cfg },
        )
        .unwrap();
        assert!(exact.p_s_hat >= approx.p_s_hat);
        assert!(exact.mean_service_s <= approx.mean_service_s);
    }

    #[test]
    fn replications_pool_and_stay_deterministic() {
        let p = base();
        let cfg = QueueConfig {
            n_packets: 8_000,
            warmup: 1_000,
            seed: 8,
            ..QueueConfig::default()
        };
        let a = run_queue_replicated(&p, &cfg, 3).unwrap();
        let b = run_queue_replicated(&p, &cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_packets, 3 * 7_000);
        assert!(run_queue_replicated(&p, &cfg, 0).is_err());
    }
}
