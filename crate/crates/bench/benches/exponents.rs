use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpexp_core::{build_scheme, check_scheme, expansion_remainder, grid_search, p_cmw, Target};

fn scheme(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_scheme");
    for n in [10u32, 100, 1000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| build_scheme(black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn comparison(c: &mut Criterion) {
    let mut group = c.benchmark_group("p_cmw");
    for n in [10u32, 1000, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| p_cmw(black_box(n)).unwrap()));
    }
    group.finish();
}

fn admissibility(c: &mut Criterion) {
    c.bench_function("check_scheme/200", |b| b.iter(|| check_scheme(black_box(200)).unwrap()));
}

fn optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid_search");
    group.sample_size(10);
    for n in [4u32, 5] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| grid_search(black_box(n), 64).unwrap())
        });
    }
    group.finish();
}

fn remainder(c: &mut Criterion) {
    c.bench_function("expansion_remainder/p_ness/10000", |b| {
        b.iter(|| expansion_remainder(black_box(10_000), Target::PNess, 30).unwrap())
    });
}

criterion_group!(benches, scheme, comparison, admissibility, optimizer, remainder);
criterion_main!(benches);
