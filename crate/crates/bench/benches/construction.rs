use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmagic::qmatrix::{build_b, mat_pow_exact};
use qmagic::Limits;

fn bench_build(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("build_b");
    for (l, n) in [(2, 10), (3, 6), (5, 4), (16, 3)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("l{l}_n{n}")),
            &(l, n),
            |b, &(l, n)| b.iter(|| build_b(black_box(l), black_box(n), &limits).unwrap()),
        );
    }
    group.finish();
}

fn bench_power(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("mat_pow_exact");
    group.sample_size(20);
    for (l, n) in [(2, 6), (3, 4), (5, 3), (6, 3)] {
        let b = build_b(l, n, &limits).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("l{l}_n{n}")), &b, |bench, b| {
            bench.iter(|| mat_pow_exact(black_box(b), l).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_build, bench_power);
criterion_main!(benches);
