//! Transmission-delay distribution and its truncated moments.
//!
//! For a whole-plane station field with Rayleigh fading the probability of
//! finishing within `t` has the closed form
//!
//! ```text
//! F(t) = exp( -noise_coeff * Theta(t) - interference_coeff * Theta(t)^(2/alpha) )
//! ```
//!
//! where `Theta(t)` is the SINR threshold from the rate law,
//! `noise_coeff = x0^alpha * N0 * B / (N * P)` and
//! `interference_coeff = d * 2 pi^2 x0^2 / (alpha * sin(2 pi / alpha))`.

use std::f64::consts::PI;

use crate::analytic::rate::{exp2_m1, threshold_parts, EXPONENT_CEILING};
use crate::analytic::AnalyticError;
use crate::math::integrate;
use crate::scenario::ScenarioParams;

/// Evaluatable transmission-delay CDF with the scenario constants cached.
///
/// Read-only after construction; share freely across sweep workers.
#[derive(Debug, Clone)]
pub struct DelayCdf {
    params: ScenarioParams,
    noise_coeff: f64,
    interference_coeff: f64,
    /// Threshold limit as t grows without bound, clamped at 0. Zero exactly
    /// when the rate penalty is non-positive (eps >= 1/2).
    theta_floor: f64,
    time_scale: f64,
    penalty_exponent: f64,
    two_over_alpha: f64,
}

/// Build the CDF for a scenario. Fails only on parameter sets that violate
/// the scenario invariants (eps outside (0,1), path loss exponent <= 2).
pub fn delay_cdf(p: &ScenarioParams) -> Result<DelayCdf, AnalyticError> {
    crate::math::q_inverse_checked(p.error_prob)?;
    let alpha = p.path_loss_exponent;
    if alpha <= 2.0 {
        return Err(AnalyticError::Domain(format!(
            "path loss exponent must exceed 2, got {alpha}"
        )));
    }
    let x0 = p.serving_distance_m;
    let noise_coeff = x0.powf(alpha) * p.noise_psd_w_per_hz * p.bandwidth_hz
        / (p.n_machines as f64 * p.tx_power_w);
    let interference_coeff =
        p.bs_density_per_m2 * 2.0 * PI * PI * x0 * x0 / (alpha * (2.0 * PI / alpha).sin());
    let (time_scale, penalty_exponent) = threshold_parts(p);
    let theta_floor = exp2_m1(penalty_exponent).max(0.0);
    Ok(DelayCdf {
        params: p.clone(),
        noise_coeff,
        interference_coeff,
        theta_floor,
        time_scale,
        penalty_exponent,
        two_over_alpha: 2.0 / alpha,
    })
}

impl DelayCdf {
    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn noise_coeff(&self) -> f64 {
        self.noise_coeff
    }

    pub fn interference_coeff(&self) -> f64 {
        self.interference_coeff
    }

    pub fn theta_floor(&self) -> f64 {
        self.theta_floor
    }

    /// SINR threshold at delay budget `t`, using the cached constants.
    /// Infinite when the exponent passes the overflow ceiling.
    pub fn threshold(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        exp2_m1(self.time_scale / t + self.penalty_exponent)
    }

    /// F(t) = P(transmission delay < t). Defined as 0 at and below t = 0
    /// (continuity limit), saturating below 1 as t grows whenever the
    /// threshold floor is positive.
    pub fn evaluate(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let exponent = self.time_scale / t + self.penalty_exponent;
        if exponent > EXPONENT_CEILING {
            return 0.0;
        }
        let theta = exp2_m1(exponent).max(0.0);
        (-self.noise_coeff * theta - self.interference_coeff * theta.powf(self.two_over_alpha))
            .exp()
    }

    /// Map a uniform draw to a deadline-truncated delay by bisecting F.
    /// Draws at or above F(T_th) land on the truncation atom.
    pub fn sample_inverse(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        let t_th = self.params.delay_threshold_s;
        if u >= self.evaluate(t_th) {
            return t_th;
        }
        let (mut lo, mut hi) = (0.0f64, t_th);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.evaluate(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Transmission success probability: F evaluated at the delay threshold.
pub fn success_probability(p: &ScenarioParams) -> Result<f64, AnalyticError> {
    Ok(delay_cdf(p)?.evaluate(p.delay_threshold_s))
}

/// Relative tolerance for the moment quadrature.
const MOMENT_REL_TOL: f64 = 1e-9;
/// Subdivision budget for the moment quadrature.
const MOMENT_MAX_SUBDIV: usize = 10_000;

/// Truncated moment `E[T_t^k] = T_th^k - k * I(t^(k-1) F(t), 0, T_th)` for
/// k in {1, 2, 3}, clamped into [0, T_th^k].
pub fn truncated_moment(cdf: &DelayCdf, order: u32) -> Result<f64, AnalyticError> {
    if !(1..=3).contains(&order) {
        return Err(AnalyticError::Domain(format!(
            "truncated_moment supports orders 1..=3, got {order}"
        )));
    }
    let t_th = cdf.params().delay_threshold_s;
    let k = order as f64;
    let cap = t_th.powi(order as i32);
    let abs_floor = 1e-18 * cap / k;
    let integrand = |t: f64| t.powi(order as i32 - 1) * cdf.evaluate(t);
    let integral = integrate(
        integrand,
        0.0,
        t_th,
        MOMENT_REL_TOL,
        abs_floor,
        MOMENT_MAX_SUBDIV,
    )?;
    Ok((cap - k * integral.value).clamp(0.0, cap))
}
