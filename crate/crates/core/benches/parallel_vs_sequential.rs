//! Compares the rayon data-parallel entry points with their sequential
//! twins on region sampling and concentration sweeps.
//!
//! Run with the default features for the parallel side; the sequential
//! functions are compiled either way, so one invocation covers both.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qrw_core::protocols::{cobit_isometry, concentration_sweep, concentration_sweep_seq};
use qrw_core::region::{sample_region, sample_region_seq};

fn bench_region_sampling(c: &mut Criterion) {
    let u = cobit_isometry();
    let mut group = c.benchmark_group("region_sampling");
    for samples in [64usize, 256] {
        group.bench_with_input(
            BenchmarkId::new("parallel", samples),
            &samples,
            |b, &n| b.iter(|| sample_region(&u, n, 42).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", samples),
            &samples,
            |b, &n| b.iter(|| sample_region_seq(&u, n, 42).unwrap()),
        );
    }
    group.finish();
}

fn bench_concentration_sweep(c: &mut Criterion) {
    let ns: Vec<u64> = (1..=64).map(|i| i * 250).collect();
    let mut group = c.benchmark_group("concentration_sweep");
    group.bench_function("parallel", |b| {
        b.iter(|| concentration_sweep(0.1, &ns).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| concentration_sweep_seq(0.1, &ns).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_region_sampling, bench_concentration_sweep);
criterion_main!(benches);
