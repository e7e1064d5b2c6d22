//! Cross-path parity: the physical sampling chain and the closed-form
//! distribution must describe the same service-time law.

use delaylab_core::rng;
use delaylab_core::{
    choose_window_radius, delay_cdf, sample_service_time, success_probability, DispersionMode,
    FieldSampler, GeometrySettings, QueueConfig, ScenarioParams,
};
use rand::Rng;

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

#[test]
fn physical_and_inverse_cdf_samples_agree_in_distribution() {
    let p = ScenarioParams::defaults();
    let cdf = delay_cdf(&p).unwrap();
    let radius = choose_window_radius(&p, 1e-4);
    let n = 100_000usize;

    let mut rng_phys = rng::stream(1001, 0);
    let sampler = FieldSampler::new(&p, radius, GeometrySettings::default(), &mut rng_phys);
    let mut physical: Vec<f64> = (0..n)
        .map(|_| {
            let s = sampler.sample(&mut rng_phys);
            sample_service_time(&p, &s, DispersionMode::Approx).0
        })
        .collect();

    let mut rng_inv = rng::stream(1002, 0);
    let mut synthetic: Vec<f64> = (0..n)
        .map(|_| cdf.sample_inverse(rng_inv.random::<f64>()))
        .collect();

    let d = ks_statistic(&mut physical, &mut synthetic);
    // two-sample critical value at the 1% level: 1.628 sqrt((n+m)/(nm))
    let critical = 1.628 * ((n + n) as f64 / (n * n) as f64).sqrt();
    assert!(
        d < critical,
        "KS statistic {d:.5} exceeds the 1% critical value {critical:.5}"
    );
}

#[test]
fn queue_failure_rate_matches_success_probability() {
    let p = ScenarioParams::defaults();
    let ps = success_probability(&p).unwrap();
    let cfg = QueueConfig {
        n_packets: 60_000,
        warmup: 5_000,
        seed: 1003,
        ..QueueConfig::default()
    };
    let report = delaylab_core::run_queue(&p, &cfg).unwrap();
    assert!(
        (report.p_s_hat - ps).abs() <= report.p_s_ci,
        "failure rate {} vs 1 - P_s {} (ci {})",
        1.0 - report.p_s_hat,
        1.0 - ps,
        report.p_s_ci
    );
}

#[test]
fn exclusion_zone_shifts_the_distribution_upward() {
    // sensitivity flag: removing nearby interferers can only improve SINR,
    // so the success fraction should not drop
    let p = ScenarioParams::defaults()
        .with_field("bs_density_per_m2", 1e-4)
        .unwrap();
    let radius = choose_window_radius(&p, 1e-4);
    let n = 50_000usize;

    let count_success = |exclusion: bool, seed: u64| {
        let mut rng = rng::stream(seed, 0);
        let sampler = FieldSampler::new(
            &p,
            radius,
            GeometrySettings {
                exclusion_zone: exclusion,
                frozen_topology: false,
            },
            &mut rng,
        );
        (0..n)
            .filter(|_| {
                let s = sampler.sample(&mut rng);
                sample_service_time(&p, &s, DispersionMode::Approx).1
            })
            .count()
    };
    let baseline = count_success(false, 2001);
    let excluded = count_success(true, 2002);
    assert!(
        excluded as f64 >= baseline as f64 - 3.0 * (n as f64 * 0.25).sqrt(),
        "exclusion zone lowered success: {excluded} vs {baseline}"
    );
}
