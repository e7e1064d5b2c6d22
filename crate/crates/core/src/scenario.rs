//! Scenario parameterization shared by the analytic and Monte Carlo paths.
//!
//! All quantities are stored in SI units (watts, meters, Hz, seconds, bits);
//! unit conversions happen only at the config boundary, in
//! [`normalize_config`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Configuration rejection, naming the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("both `tx_power_w` and `tx_power_dbm` given; provide exactly one")]
    BothPowerUnits,
    #[error("neither `tx_power_w` nor `tx_power_dbm` given; provide exactly one")]
    NeitherPowerUnit,
    #[error(
        "`path_loss_exponent` must exceed 2 (got {0}); the interference exponent diverges at 2"
    )]
    PathLossExponentTooSmall(f64),
    #[error("`{field}` must be strictly positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("`{field}` must be non-negative (got {value})")]
    Negative { field: &'static str, value: f64 },
    #[error("`error_prob` must lie in (0, 1) (got {0})")]
    ErrorProbOutOfRange(f64),
    #[error("`n_machines` must be at least 1")]
    NoMachines,
    #[error("`{field}` must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("unknown scenario field `{0}`")]
    UnknownField(String),
    #[error("`{field}` must be a positive integer for this axis (got {value})")]
    NotAnInteger { field: &'static str, value: f64 },
}

/// Validated scenario in SI units. Immutable after construction and safe to
/// share across concurrent workers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Base-station transmit power, watts.
    pub tx_power_w: f64,
    /// Distance from the typical machine to its serving base station, meters.
    pub serving_distance_m: f64,
    /// Noise power spectral density, watts per Hz.
    pub noise_psd_w_per_hz: f64,
    /// Total machine-network bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Number of machines sharing the bandwidth on orthogonal sub-bands.
    pub n_machines: u32,
    /// Path loss exponent, dimensionless; must exceed 2.
    pub path_loss_exponent: f64,
    /// Base-station density, stations per square meter.
    pub bs_density_per_m2: f64,
    /// Packet size in bits; also the blocklength proxy in the rate law.
    /// Real-valued so sweeps and root-finding stay smooth.
    pub packet_bits: f64,
    /// Target packet error probability, in (0, 1).
    pub error_prob: f64,
    /// Transmission delay threshold, seconds; service is truncated here.
    pub delay_threshold_s: f64,
    /// Poisson packet arrival rate at the base-station buffer, packets/s.
    pub arrival_rate_pps: f64,
}

impl ScenarioParams {
    /// Bandwidth of one machine's sub-band, Hz.
    pub fn per_machine_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_machines as f64
    }

    /// Noise power seen on one sub-band, watts.
    pub fn noise_power_w(&self) -> f64 {
        self.noise_psd_w_per_hz * self.per_machine_bandwidth_hz()
    }

    /// The documented reference scenario; see [`RawScenarioConfig::defaults`].
    pub fn defaults() -> Self {
        normalize_config(&RawScenarioConfig::defaults()).expect("built-in defaults must validate")
    }

    /// Re-run the construction-time checks. Used after field edits.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [
            ("tx_power_w", self.tx_power_w),
            ("serving_distance_m", self.serving_distance_m),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("packet_bits", self.packet_bits),
            ("delay_threshold_s", self.delay_threshold_s),
        ] {
            if !value.is_finite() {
                return Err(ConfigError::NotFinite { field, value });
            }
            if value <= 0.0 {
                return Err(ConfigError::NonPositive { field, value });
            }
        }
        for (field, value) in [
            ("bs_density_per_m2", self.bs_density_per_m2),
            ("arrival_rate_pps", self.arrival_rate_pps),
        ] {
            if !value.is_finite() {
                return Err(ConfigError::NotFinite { field, value });
            }
            if value < 0.0 {
                return Err(ConfigError::Negative { field, value });
            }
        }
        if !self.path_loss_exponent.is_finite() {
            return Err(ConfigError::NotFinite {
                field: "path_loss_exponent",
                value: self.path_loss_exponent,
            });
        }
        if self.path_loss_exponent <= 2.0 {
            return Err(ConfigError::PathLossExponentTooSmall(
                self.path_loss_exponent,
            ));
        }
        if !(self.error_prob > 0.0 && self.error_prob < 1.0) {
            return Err(ConfigError::ErrorProbOutOfRange(self.error_prob));
        }
        if self.n_machines < 1 {
            return Err(ConfigError::NoMachines);
        }
        Ok(())
    }

    /// Return a copy with the named field replaced, revalidated. The field
    /// name matches the config key; this is what sweep axes use.
    pub fn with_field(&self, field: &str, value: f64) -> Result<Self, ConfigError> {
        let mut p = self.clone();
        match field {
            "tx_power_w" => p.tx_power_w = value,
            "serving_distance_m" => p.serving_distance_m = value,
            "noise_psd_w_per_hz" => p.noise_psd_w_per_hz = value,
            "bandwidth_hz" => p.bandwidth_hz = value,
            "n_machines" => {
                if value < 1.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(ConfigError::NotAnInteger {
                        field: "n_machines",
                        value,
                    });
                }
                p.n_machines = value as u32;
            }
            "path_loss_exponent" => p.path_loss_exponent = value,
            "bs_density_per_m2" => p.bs_density_per_m2 = value,
            "packet_bits" => p.packet_bits = value,
            "error_prob" => p.error_prob = value,
            "delay_threshold_s" => p.delay_threshold_s = value,
            "arrival_rate_pps" => p.arrival_rate_pps = value,
            other => return Err(ConfigError::UnknownField(other.to_string())),
        }
        p.validate()?;
        Ok(p)
    }
}

/// Raw key-value scenario description, exactly the JSON config schema.
/// Power may be given as `tx_power_w` or `tx_power_dbm` (exactly one).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub serving_distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_psd_w_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_machines: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_loss_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_density_per_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_threshold_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_rate_pps: Option<f64>,
}

impl RawScenarioConfig {
    /// Documented defaults: transmit power 24 dBm, serving distance 10 m,
    /// noise density 1e-10 W/Hz, 100 MHz shared by 50 machines, path loss
    /// exponent 4, 1 ms delay threshold, 1e-5 stations per square meter,
    /// error probability 1e-5, 100-bit packets, 100 packets/s arrivals.
    pub fn defaults() -> Self {
        RawScenarioConfig {
            tx_power_w: None,
            tx_power_dbm: Some(24.0),
            serving_distance_m: Some(10.0),
            noise_psd_w_per_hz: Some(1e-10),
            bandwidth_hz: Some(1e8),
            n_machines: Some(50),
            path_loss_exponent: Some(4.0),
            bs_density_per_m2: Some(1e-5),
            packet_bits: Some(100.0),
            error_prob: Some(1e-5),
            delay_threshold_s: Some(1e-3),
            arrival_rate_pps: Some(100.0),
        }
    }

    /// Overlay `other` on `self`: fields present in `other` win. Giving
    /// `tx_power_dbm` clears an inherited `tx_power_w` and vice versa, so a
    /// config can override the default power in either unit.
    pub fn merged(&self, other: &RawScenarioConfig) -> RawScenarioConfig {
        let mut out = self.clone();
        if other.tx_power_w.is_some() {
            out.tx_power_w = other.tx_power_w;
            out.tx_power_dbm = None;
        }
        if other.tx_power_dbm.is_some() {
            out.tx_power_dbm = other.tx_power_dbm;
            out.tx_power_w = None;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { out.$f = other.$f; } )* };
        }
        take!(
            serving_distance_m,
            noise_psd_w_per_hz,
            bandwidth_hz,
            n_machines,
            path_loss_exponent,
            bs_density_per_m2,
            packet_bits,
            error_prob,
            delay_threshold_s,
            arrival_rate_pps
        );
        out
    }
}

/// Convert dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Convert watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    30.0 + 10.0 * watts.log10()
}

/// Validate a raw config and return it in SI units.
///
/// Power must be given in exactly one of dBm or watts; dBm converts via
/// `watts = 10^((dBm - 30) / 10)`. Normalizing an already-SI config is the
/// identity.
pub fn normalize_config(raw: &RawScenarioConfig) -> Result<ScenarioParams, ConfigError> {
    let tx_power_w = match (raw.tx_power_w, raw.tx_power_dbm) {
        (Some(_), Some(_)) => return Err(ConfigError::BothPowerUnits),
        (None, None) => return Err(ConfigError::NeitherPowerUnit),
        (Some(w), None) => w,
        (None, Some(dbm)) => {
            if !dbm.is_finite() {
                return Err(ConfigError::NotFinite {
                    field: "tx_power_dbm",
                    value: dbm,
                });
            }
            dbm_to_watts(dbm)
        }
    };
    fn req<T: Copy>(v: Option<T>, field: &'static str) -> Result<T, ConfigError> {
        v.ok_or(ConfigError::MissingField(field))
    }
    let params = ScenarioParams {
        tx_power_w,
        serving_distance_m: req(raw.serving_distance_m, "serving_distance_m")?,
        noise_psd_w_per_hz: req(raw.noise_psd_w_per_hz, "noise_psd_w_per_hz")?,
        bandwidth_hz: req(raw.bandwidth_hz, "bandwidth_hz")?,
        n_machines: req(raw.n_machines, "n_machines")?,
        path_loss_exponent: req(raw.path_loss_exponent, "path_loss_exponent")?,
        bs_density_per_m2: req(raw.bs_density_per_m2, "bs_density_per_m2")?,
        packet_bits: req(raw.packet_bits, "packet_bits")?,
        error_prob: req(raw.error_prob, "error_prob")?,
        delay_threshold_s: req(raw.delay_threshold_s, "delay_threshold_s")?,
        arrival_rate_pps: req(raw.arrival_rate_pps, "arrival_rate_pps")?,
    };
    params.validate()?;
    Ok(params)
}

/// Offered load `rho = lambda * E[T_t]`. The queue is unstable when the
/// result reaches 1; callers decide what to do with that.
pub fn utilization(p: &ScenarioParams, mean_service_s: f64) -> f64 {
    debug_assert!(mean_service_s >= 0.0);
    p.arrival_rate_pps * mean_service_s
}

/// Stability predicate for an offered load.
pub fn queue_is_stable(rho: f64) -> bool {
    rho < 1.0
}
