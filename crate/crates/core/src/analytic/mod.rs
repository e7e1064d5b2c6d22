//! Closed-form evaluation of the delay metrics: finite-blocklength rate,
//! the transmission-delay CDF, truncated moments by quadrature, and the
//! M/G/1 mean/variance expressions built on them.

mod cdf;
mod rate;
mod report;

pub use cdf::{delay_cdf, success_probability, truncated_moment, DelayCdf};
pub use rate::{fbl_rate, sinr_threshold, DispersionMode};
pub use report::{
    analyze_scenario, expected_delay, expected_queuing_delay, jitter, transmission_report,
    AnalyticReport, DelaySummary, TwVarianceMode,
};

use thiserror::Error;

/// Failures in the closed-form path.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("queue unstable: offered load rho = {rho} >= 1")]
    UnstableQueue { rho: f64 },
    #[error("moment quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },
}

impl From<crate::math::QuadError> for AnalyticError {
    fn from(e: crate::math::QuadError) -> Self {
        match e {
            crate::math::QuadError::NonConvergence {
                achieved,
                requested,
                ..
            } => AnalyticError::Quadrature {
                achieved,
                requested,
            },
        }
    }
}

/// Inverse Gaussian tail Q^-1: the z with Q(z) = eps.
///
/// Absolute error is below 1e-10 across (0, 1); out-of-range arguments are
/// rejected.
pub fn q_inverse(eps: f64) -> Result<f64, AnalyticError> {
    crate::math::q_inverse_checked(eps)
}
