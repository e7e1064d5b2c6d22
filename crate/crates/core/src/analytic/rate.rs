//! Finite-blocklength rate law and the SINR threshold it induces.

use std::f64::consts::LOG2_E;

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticError;
use crate::math::q_inverse_checked;
use crate::scenario::ScenarioParams;

/// How the channel dispersion enters the rate penalty.
///
/// `Approx` freezes the dispersion at its high-SINR limit so the whole
/// penalty is `sqrt(1/(2s)) * Q^-1(eps) * log2 e`; this is the law the
/// closed-form delay CDF inverts, so the simulator defaults to it too.
/// `Exact` keeps the SINR-dependent dispersion and exists to quantify the
/// gap the approximation introduces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionMode {
    #[default]
    Approx,
    Exact,
}

/// SINR-dependent channel dispersion in bits^2 per channel use:
/// `V = (g/2) * (g+2)/(g+1)^2 * (log2 e)^2`.
fn dispersion_bits(sinr: f64) -> f64 {
    0.5 * sinr * (sinr + 2.0) / ((sinr + 1.0) * (sinr + 1.0)) * LOG2_E * LOG2_E
}

/// Achievable rate in bits/s at finite blocklength.
///
/// The Shannon term is `(B/N) log2(1 + sinr)`; the reliability penalty is
/// `sqrt(V/s) * Q^-1(eps)` with `V` fixed at its limit `(log2 e)^2 / 2` in
/// `Approx` mode. The result may be negative; callers treat a non-positive
/// rate as transmission failure.
pub fn fbl_rate(p: &ScenarioParams, sinr: f64, mode: DispersionMode) -> f64 {
    debug_assert!(sinr >= 0.0, "SINR must be non-negative");
    debug_assert!(p.packet_bits > 0.0);
    let q = q_inverse_checked(p.error_prob).expect("validated params carry eps in (0,1)");
    let shannon = p.per_machine_bandwidth_hz() * (1.0 + sinr).log2();
    let penalty = match mode {
        DispersionMode::Approx => (0.5 / p.packet_bits).sqrt() * q * LOG2_E,
        DispersionMode::Exact => (dispersion_bits(sinr) / p.packet_bits).sqrt() * q,
    };
    shannon - penalty
}

/// Base-2 exponent of the SINR threshold at delay budget `t`:
/// `(N/B) * (s/t + sqrt(1/(2s)) * Q^-1(eps) * log2 e)`.
pub(crate) fn threshold_exponent(p: &ScenarioParams, t: f64) -> f64 {
    let (time_scale, penalty) = threshold_parts(p);
    time_scale / t + penalty
}

/// `(time_scale, penalty_exponent)` so the exponent is
/// `time_scale / t + penalty_exponent`. Cached by `DelayCdf`.
pub(crate) fn threshold_parts(p: &ScenarioParams) -> (f64, f64) {
    let q = q_inverse_checked(p.error_prob).expect("validated params carry eps in (0,1)");
    let n_over_b = 1.0 / p.per_machine_bandwidth_hz();
    let time_scale = n_over_b * p.packet_bits;
    let penalty = n_over_b * (0.5 / p.packet_bits).sqrt() * q * LOG2_E;
    (time_scale, penalty)
}

/// Exponent ceiling past which the threshold is treated as infinite; keeps
/// `exp2` away from overflow while preserving monotonicity (the CDF maps
/// the sentinel to zero).
pub(crate) const EXPONENT_CEILING: f64 = 1000.0;

/// Threshold SINR for finishing within `t` seconds: the transmission delay
/// is below `t` exactly when the SINR exceeds this value.
///
/// Strictly decreasing in `t`, always above -1, and `f64::INFINITY` when
/// the base-2 exponent passes 1000 ("effectively infinite"; the CDF maps it
/// to probability 0).
pub fn sinr_threshold(p: &ScenarioParams, t: f64) -> Result<f64, AnalyticError> {
    if t <= 0.0 || t.is_nan() {
        return Err(AnalyticError::Domain(format!(
            "sinr_threshold requires t > 0, got {t}"
        )));
    }
    // reject invalid eps before the cached unwrap path
    q_inverse_checked(p.error_prob)?;
    let exponent = threshold_exponent(p, t);
    Ok(exp2_m1(exponent))
}

/// `2^x - 1` computed in the log domain, with the overflow sentinel applied.
pub(crate) fn exp2_m1(exponent: f64) -> f64 {
    if exponent > EXPONENT_CEILING {
        f64::INFINITY
    } else {
        (exponent * std::f64::consts::LN_2).exp_m1()
    }
}
