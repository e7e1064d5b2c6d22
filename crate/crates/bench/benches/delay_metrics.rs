use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use delaylab_core::rng;
use delaylab_core::{
    choose_window_radius, delay_cdf, q_inverse, run_queue, truncated_moment, FieldSampler,
    GeometrySettings, QueueConfig, ScenarioParams,
};

fn bench_q_inverse(c: &mut Criterion) {
    c.bench_function("q_inverse_1e-5", |b| {
        b.iter(|| q_inverse(black_box(1e-5)).unwrap())
    });
}

fn bench_cdf_evaluate(c: &mut Criterion) {
    let p = ScenarioParams::defaults();
    let cdf = delay_cdf(&p).unwrap();
    c.bench_function("delay_cdf_evaluate", |b| {
        let mut t = 0.0;
        b.iter(|| {
            t += 1e-6;
            if t > 1e-3 {
                t = 1e-6;
            }
            black_box(cdf.evaluate(black_box(t)))
        })
    });
}

fn bench_moments(c: &mut Criterion) {
    let p = ScenarioParams::defaults();
    let cdf = delay_cdf(&p).unwrap();
    c.bench_function("truncated_moments_1_2_3", |b| {
        b.iter(|| {
            for k in 1..=3 {
                black_box(truncated_moment(&cdf, k).unwrap());
            }
        })
    });
}

fn bench_field_sample(c: &mut Criterion) {
    let p = ScenarioParams::defaults();
    let radius = choose_window_radius(&p, 1e-4);
    let mut rng = rng::stream(1, 0);
    let sampler = FieldSampler::new(&p, radius, GeometrySettings::default(), &mut rng);
    c.bench_function("sinr_field_sample", |b| {
        b.iter(|| black_box(sampler.sample(&mut rng).sinr))
    });
}

fn bench_queue_run(c: &mut Criterion) {
    let p = ScenarioParams::defaults();
    let cfg = QueueConfig {
        n_packets: 10_000,
        warmup: 1_000,
        seed: 7,
        ..QueueConfig::default()
    };
    c.bench_function("queue_10k_packets", |b| {
        b.iter(|| black_box(run_queue(&p, &cfg).unwrap().mean_delay_s))
    });
}

criterion_group!(
    benches,
    bench_q_inverse,
    bench_cdf_evaluate,
    bench_moments,
    bench_field_sample,
    bench_queue_run
);
criterion_main!(benches);
