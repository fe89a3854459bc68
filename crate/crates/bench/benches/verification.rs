use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmagic::extremal::{verify_theorem_exhaustive, verify_theorem_sampled};
use qmagic::Limits;

fn bench_exhaustive(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("theorem_exhaustive");
    group.sample_size(10);
    for (l, n) in [(2, 4), (5, 2), (3, 3)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("l{l}_n{n}")),
            &(l, n),
            |b, &(l, n)| b.iter(|| verify_theorem_exhaustive(black_box(l), black_box(n), &limits, 0).unwrap()),
        );
    }
    group.finish();
}

fn bench_sampled(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("theorem_sampled");
    group.sample_size(10);
    for threads in [1, 0] {
        group.bench_with_input(BenchmarkId::new("l3_n4_100k", threads), &threads, |b, &threads| {
            b.iter(|| verify_theorem_sampled(3, 4, 100_000, black_box(1), &limits, threads).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_exhaustive, bench_sampled);
criterion_main!(benches);
