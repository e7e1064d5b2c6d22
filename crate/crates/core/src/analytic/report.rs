//! M/G/1 delay metrics assembled from the truncated moments.

use serde::{Deserialize, Serialize};

use crate::analytic::cdf::{delay_cdf, truncated_moment};
use crate::analytic::AnalyticError;
use crate::scenario::{utilization, ScenarioParams};

/// Which waiting-variance expression to use.
///
/// `Standard` divides the third-moment term by `3 (1 - rho)`, the classical
/// M/G/1 result. `PaperLiteral` divides it by `2 (1 - rho)` instead and is
/// retained only so the two variants can be compared; simulation arbitrates
/// between them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwVarianceMode {
    #[default]
    Standard,
    PaperLiteral,
}

/// Closed-form metric bundle for one scenario.
///
/// The four queue-dependent fields are `None` when the queue is unstable
/// (`rho >= 1`); the transmission-side metrics are always present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    /// Transmission success probability F(T_th).
    pub p_s: f64,
    /// Truncated mean transmission delay, seconds.
    pub e_tt_s: f64,
    /// Truncated second moment, s^2.
    pub e_tt2_s2: f64,
    /// Truncated third moment, s^3.
    pub e_tt3_s3: f64,
    /// Expected queuing delay, seconds (stable queues only).
    pub e_tw_s: Option<f64>,
    /// Expected total delay, seconds (stable queues only).
    pub t_m_s: Option<f64>,
    /// Variance of transmission delay, s^2.
    pub var_tt_s2: f64,
    /// Variance of queuing delay, s^2 (stable queues only).
    pub var_tw_s2: Option<f64>,
    /// Delay jitter: var_tt + var_tw, s^2 (stable queues only).
    pub jitter_s2: Option<f64>,
    /// Offered load lambda * E[T_t].
    pub rho: f64,
}

/// Mean-delay subset returned by [`expected_delay`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySummary {
    pub e_tt_s: f64,
    pub e_tw_s: f64,
    pub t_m_s: f64,
    pub rho: f64,
}

/// Pollaczek-Khinchine mean waiting time
/// `E[T_w] = lambda m2 / (2 (1 - lambda m1))`.
///
/// Fails with [`AnalyticError::UnstableQueue`] when `lambda * m1 >= 1`.
pub fn expected_queuing_delay(
    p: &ScenarioParams,
    mean_service_s: f64,
    second_moment_s2: f64,
) -> Result<f64, AnalyticError> {
    let rho = utilization(p, mean_service_s);
    if rho >= 1.0 {
        return Err(AnalyticError::UnstableQueue { rho });
    }
    Ok(p.arrival_rate_pps * second_moment_s2 / (2.0 * (1.0 - rho)))
}

/// Expected total delay `T_m = E[T_t] + E[T_w]`, with the offered load.
pub fn expected_delay(p: &ScenarioParams) -> Result<DelaySummary, AnalyticError> {
    let cdf = delay_cdf(p)?;
    let m1 = truncated_moment(&cdf, 1)?;
    let m2 = truncated_moment(&cdf, 2)?;
    let e_tw_s = expected_queuing_delay(p, m1, m2)?;
    Ok(DelaySummary {
        e_tt_s: m1,
        e_tw_s,
        t_m_s: m1 + e_tw_s,
        rho: utilization(p, m1),
    })
}

fn waiting_variance(p: &ScenarioParams, e_tw: f64, m1: f64, m3: f64, mode: TwVarianceMode) -> f64 {
    let rho = utilization(p, m1);
    let denom = match mode {
        TwVarianceMode::Standard => 3.0,
        TwVarianceMode::PaperLiteral => 2.0,
    };
    e_tw * e_tw + p.arrival_rate_pps * m3 / (denom * (1.0 - rho))
}

/// Full metric bundle including jitter. Errors on unstable queues.
pub fn jitter(p: &ScenarioParams, mode: TwVarianceMode) -> Result<AnalyticReport, AnalyticError> {
    let report = analyze_scenario(p, mode)?;
    if report.jitter_s2.is_none() {
        return Err(AnalyticError::UnstableQueue { rho: report.rho });
    }
    Ok(report)
}

/// Transmission-side metrics only; queue fields left empty. This is what
/// unstable cells report.
pub fn transmission_report(p: &ScenarioParams) -> Result<AnalyticReport, AnalyticError> {
    let cdf = delay_cdf(p)?;
    let p_s = cdf.evaluate(p.delay_threshold_s);
    let m1 = truncated_moment(&cdf, 1)?;
    let m2 = truncated_moment(&cdf, 2)?;
    let m3 = truncated_moment(&cdf, 3)?;
    Ok(AnalyticReport {
        p_s,
        e_tt_s: m1,
        e_tt2_s2: m2,
        e_tt3_s3: m3,
        e_tw_s: None,
        t_m_s: None,
        var_tt_s2: (m2 - m1 * m1).max(0.0),
        var_tw_s2: None,
        jitter_s2: None,
        rho: utilization(p, m1),
    })
}

/// Evaluate everything the scenario supports: queue metrics are filled in
/// when the queue is stable, left `None` otherwise. Never fails on
/// instability — callers inspect `rho`.
pub fn analyze_scenario(
    p: &ScenarioParams,
    mode: TwVarianceMode,
) -> Result<AnalyticReport, AnalyticError> {
    let mut report = transmission_report(p)?;
    if report.rho < 1.0 {
        let e_tw = p.arrival_rate_pps * report.e_tt2_s2 / (2.0 * (1.0 - report.rho));
        let var_tw = waiting_variance(p, e_tw, report.e_tt_s, report.e_tt3_s3, mode);
        report.e_tw_s = Some(e_tw);
        report.t_m_s = Some(report.e_tt_s + e_tw);
        report.var_tw_s2 = Some(var_tw);
        report.jitter_s2 = Some(report.var_tt_s2 + var_tw);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> ScenarioParams {
        ScenarioParams::defaults()
    }

    #[test]
    fn zero_arrivals_remove_queueing() {
        let p = base().with_field("arrival_rate_pps", 0.0).unwrap();
        assert_eq!(expected_queuing_delay(&p, 1e-4, 1e-8).unwrap(), 0.0);
        let s = expected_delay(&p).unwrap();
        assert_eq!(s.e_tw_s, 0.0);
        assert_eq!(s.t_m_s, s.e_tt_s);
        let r = jitter(&p, TwVarianceMode::Standard).unwrap();
        assert_eq!(r.var_tw_s2, Some(0.0));
        assert_eq!(r.jitter_s2, Some(r.var_tt_s2));
    }

    #[test]
    fn deterministic_service_reduces_to_md1() {
        // m1 = d, m2 = d^2 gives the classic M/D/1 mean wait
        let d = 5e-4;
        let p = base().with_field("arrival_rate_pps", 1000.0).unwrap();
        let got = expected_queuing_delay(&p, d, d * d).unwrap();
        let rho = 1000.0 * d;
        assert_relative_eq!(
            got,
            1000.0 * d * d / (2.0 * (1.0 - rho)),
            max_relative = 1e-14
        );
    }

    #[test]
    fn md1_jitter_closed_form() {
        // degenerate service at d: var_tt = 0 and the waiting variance has
        // the M/D/1 closed form (lambda d^2 / (2(1-rho)))^2 + lambda d^3/(3(1-rho))
        let d = 5e-4;
        let lambda = 1000.0;
        let p = base().with_field("arrival_rate_pps", lambda).unwrap();
        let e_tw = lambda * d * d / (2.0 * (1.0 - lambda * d));
        let var = waiting_variance(&p, e_tw, d, d * d * d, TwVarianceMode::Standard);
        let expected = e_tw * e_tw + lambda * d.powi(3) / (3.0 * (1.0 - lambda * d));
        assert_relative_eq!(var, expected, max_relative = 1e-14);
    }

    #[test]
    fn unstable_queue_is_reported() {
        let p = base().with_field("arrival_rate_pps", 1e7).unwrap();
        match expected_delay(&p) {
            Err(AnalyticError::UnstableQueue { rho }) => assert!(rho >= 1.0),
            other => panic!("expected unstable queue, got {other:?}"),
        }
        assert!(jitter(&p, TwVarianceMode::Standard).is_err());
        // analyze_scenario degrades instead of failing
        let r = analyze_scenario(&p, TwVarianceMode::Standard).unwrap();
        assert!(r.rho >= 1.0);
        assert!(r.t_m_s.is_none() && r.jitter_s2.is_none());
        assert!(r.p_s > 0.0);
    }

    #[test]
    fn report_identities_hold_exactly() {
        let r = jitter(&base(), TwVarianceMode::Standard).unwrap();
        assert_eq!(r.t_m_s.unwrap(), r.e_tt_s + r.e_tw_s.unwrap());
        assert_eq!(r.jitter_s2.unwrap(), r.var_tt_s2 + r.var_tw_s2.unwrap());
        assert!(r.jitter_s2.unwrap() >= r.var_tt_s2);
        assert!((0.0..=1.0).contains(&r.p_s));
    }

    #[test]
    fn mean_delay_grows_with_arrival_rate() {
        let mut prev = 0.0;
        for lambda in [50.0, 200.0, 500.0, 900.0] {
            let p = base().with_field("arrival_rate_pps", lambda).unwrap();
            let t_m = expected_delay(&p).unwrap().t_m_s;
            assert!(t_m > prev);
            prev = t_m;
        }
    }

    #[test]
    fn paper_literal_variant_is_larger() {
        let std = jitter(&base(), TwVarianceMode::Standard).unwrap();
        let lit = jitter(&base(), TwVarianceMode::PaperLiteral).unwrap();
        assert!(lit.var_tw_s2.unwrap() > std.var_tw_s2.unwrap());
        assert_eq!(lit.var_tt_s2, std.var_tt_s2);
    }
}
