use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hamlink_core::eigen::jacobi_eigen;
use hamlink_core::{build_a, FunctionalContext, PeriodicSequence};

fn point(m: usize) -> PeriodicSequence {
    PeriodicSequence::new((0..m).map(|k| ((k as f64) * 1.3).sin()).collect()).unwrap()
}

fn functional(c: &mut Criterion) {
    let mut group = c.benchmark_group("functional");
    for m in [6usize, 16, 64] {
        let ctx = FunctionalContext::example31(m, 3, 1.0, 3.0, 0.01, 0.25).unwrap();
        let u = point(m);
        group.bench_with_input(BenchmarkId::new("i_value", m), &u, |b, u| {
            b.iter(|| ctx.i_value(black_box(u)))
        });
        group.bench_with_input(BenchmarkId::new("i_gradient", m), &u, |b, u| {
            b.iter(|| ctx.i_gradient(black_box(u)))
        });
        group.bench_with_input(BenchmarkId::new("i_hessian", m), &u, |b, u| {
            b.iter(|| ctx.i_hessian(black_box(u)))
        });
    }
    group.finish();
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("jacobi");
    for m in [6usize, 16, 64] {
        let a = build_a(m).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &a, |b, a| {
            b.iter(|| jacobi_eigen(black_box(a)))
        });
    }
    group.finish();
}

criterion_group!(benches, functional, eigen);
criterion_main!(benches);
