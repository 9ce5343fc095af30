use std::hint::black_box;

use contextlab::experiments::{hemisphere_scaling, sweep_theta, SweepConfig};
use contextlab::par::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn theta_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("theta_sweep");
    group.sample_size(10);
    let config = SweepConfig {
        grid: 48,
        ..SweepConfig::default()
    };
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, config.grid), &exec, |b, &exec| {
            b.iter(|| sweep_theta(black_box(config), exec).unwrap())
        });
    }
    group.finish();
}

fn scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("hemisphere_scaling");
    group.sample_size(10);
    let ns: Vec<u32> = (2..=16).collect();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, ns.len()), &exec, |b, &exec| {
            b.iter(|| hemisphere_scaling(black_box(&ns), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, theta_sweep, scaling);
criterion_main!(benches);
