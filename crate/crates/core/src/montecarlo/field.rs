//! Station-field sampling and physical SINR synthesis.
//!
//! Interfering stations are scattered over the full disk around the typical
//! machine, including radii inside the serving distance: the closed-form
//! interference constant is the whole-plane integral, so a guard zone here
//! would not match it. An exclusion-zone variant (interferers only beyond
//! the serving distance) is available as a sensitivity flag.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::analytic::{fbl_rate, DispersionMode};
use crate::rng;
use crate::scenario::ScenarioParams;

/// One synthesized SINR draw with the raw field behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrSample {
    /// Serving-link power gain (unit-mean exponential).
    pub serving_gain: f64,
    /// Distances to each interfering station, meters.
    pub interferer_distances_m: Vec<f64>,
    /// Power gains of each interfering link (unit-mean exponential).
    pub interferer_gains: Vec<f64>,
    /// Resulting SINR.
    pub sinr: f64,
}

/// Geometry variants for sensitivity studies. Defaults reproduce the
/// closed-form model: whole-plane field, fresh geometry every packet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySettings {
    /// Scatter interferers only beyond the serving distance.
    pub exclusion_zone: bool,
    /// Freeze interferer positions across packets, redrawing only fading.
    /// Departs from the iid-service queue model; clearly a sensitivity knob.
    pub frozen_topology: bool,
}

/// Finite simulation window for the infinite station field: radius such
/// that the expected interference from beyond it,
/// `P d 2 pi R^(2-alpha) / (alpha - 2)`, stays below `tail_tol` times the
/// per-band noise power. Floored at ten serving distances.
pub fn choose_window_radius(p: &ScenarioParams, tail_tol: f64) -> f64 {
    assert!(
        tail_tol > 0.0 && tail_tol <= 1e-2,
        "tail_tol must lie in (0, 1e-2]"
    );
    let floor = 10.0 * p.serving_distance_m;
    if p.bs_density_per_m2 <= 0.0 {
        return floor;
    }
    let alpha = p.path_loss_exponent;
    let noise = p.noise_power_w();
    let r = (p.tx_power_w * p.bs_density_per_m2 * 2.0 * std::f64::consts::PI
        / ((alpha - 2.0) * tail_tol * noise))
        .powf(1.0 / (alpha - 2.0));
    r.max(floor)
}

/// Reusable sampler with the scenario constants cached.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    tx_power_w: f64,
    serving_distance_m: f64,
    alpha: f64,
    noise_w: f64,
    window_radius_m: f64,
    mean_interferers: f64,
    min_radius_m: f64,
    frozen_distances: Option<Vec<f64>>,
}

impl FieldSampler {
    /// Sampler over a disk of `window_radius_m`. For frozen topology the
    /// geometry is drawn once, here, from `rng`.
    pub fn new<R: Rng>(
        p: &ScenarioParams,
        window_radius_m: f64,
        geometry: GeometrySettings,
        rng: &mut R,
    ) -> Self {
        assert!(window_radius_m > 0.0);
        let min_radius_m = if geometry.exclusion_zone {
            p.serving_distance_m.min(window_radius_m)
        } else {
            0.0
        };
        let area = std::f64::consts::PI
            * (window_radius_m * window_radius_m - min_radius_m * min_radius_m);
        let mean_interferers = p.bs_density_per_m2 * area;
        let mut sampler = FieldSampler {
            tx_power_w: p.tx_power_w,
            serving_distance_m: p.serving_distance_m,
            alpha: p.path_loss_exponent,
            noise_w: p.noise_power_w(),
            window_radius_m,
            mean_interferers,
            min_radius_m,
            frozen_distances: None,
        };
        if geometry.frozen_topology {
            sampler.frozen_distances = Some(sampler.draw_distances(rng));
        }
        sampler
    }

    fn draw_count<R: Rng>(&self, rng: &mut R) -> usize {
        if self.mean_interferers <= 0.0 {
            return 0;
        }
        let poisson = Poisson::new(self.mean_interferers).expect("positive mean");
        poisson.sample(rng) as usize
    }

    /// Position draw: uniform over the (possibly annular) window, realized
    /// as r = sqrt(r_min^2 + U (R^2 - r_min^2)). Angles are irrelevant to
    /// path loss and are not drawn.
    fn draw_distances<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.draw_count(rng);
        let r2_min = self.min_radius_m * self.min_radius_m;
        let r2_span = self.window_radius_m * self.window_radius_m - r2_min;
        (0..n)
            .map(|_| (r2_min + rng.random::<f64>() * r2_span).sqrt())
            .collect()
    }

    /// Draw one SINR sample. Per-draw order is fixed (geometry, interferer
    /// gains, serving gain) so replays are bit-exact.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> SinrSample {
        let distances = match &self.frozen_distances {
            Some(d) => d.clone(),
            None => self.draw_distances(rng),
        };
        let gains: Vec<f64> = (0..distances.len()).map(|_| exp1(rng)).collect();
        let serving_gain = exp1(rng);
        let interference: f64 = distances
            .iter()
            .zip(&gains)
            .map(|(&r, &h)| self.tx_power_w * r.powf(-self.alpha) * h)
            .sum();
        let signal = self.tx_power_w * self.serving_distance_m.powf(-self.alpha) * serving_gain;
        SinrSample {
            serving_gain,
            interferer_distances_m: distances,
            interferer_gains: gains,
            sinr: signal / (interference + self.noise_w),
        }
    }
}

/// Unit-mean exponential (Rayleigh power gain) via inverse transform.
#[inline]
fn exp1<R: Rng>(rng: &mut R) -> f64 {
    // random::<f64>() is in [0, 1); flip so the log argument stays positive
    -(1.0 - rng.random::<f64>()).ln()
}

/// One-shot field draw from a fresh stream of `rng_seed`; identical seed,
/// identical sample.
pub fn sample_field(p: &ScenarioParams, rng_seed: u64, window_radius_m: f64) -> SinrSample {
    let mut rng = rng::stream(rng_seed, 0);
    FieldSampler::new(p, window_radius_m, GeometrySettings::default(), &mut rng).sample(&mut rng)
}

/// Deadline-truncated service time for a sampled SINR.
///
/// A non-positive rate, or a transmission that would run past the delay
/// threshold, is terminated at exactly the threshold and flagged failed;
/// the returned time is always in (0, T_th].
pub fn sample_service_time(
    p: &ScenarioParams,
    sample: &SinrSample,
    mode: DispersionMode,
) -> (f64, bool) {
    let rate = fbl_rate(p, sample.sinr, mode);
    let t_th = p.delay_threshold_s;
    if rate <= 0.0 {
        return (t_th, false);
    }
    let t = p.packet_bits / rate;
    if t >= t_th {
        (t_th, false)
    } else {
        (t, true)
    }
}
