use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hamlink_core::{
    find_critical_points, maximize_i, two_solution_certificate, FunctionalContext, SolverConfig,
};

fn solver(c: &mut Criterion) {
    let ctx = FunctionalContext::example31(6, 3, 1.0, 3.0, 0.01, 0.25).unwrap();
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("maximize_i", |b| {
        b.iter(|| maximize_i(&ctx, black_box(&cfg)))
    });
    group.bench_function("find_critical_points", |b| {
        b.iter(|| find_critical_points(&ctx, black_box(&cfg)))
    });
    group.bench_function("two_solution_certificate", |b| {
        b.iter(|| two_solution_certificate(&ctx, black_box(&cfg)))
    });
    group.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
