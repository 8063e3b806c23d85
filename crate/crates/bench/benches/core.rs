use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hce_bench::{hnrg_graph, random_distances, random_linkage, random_partition, random_series};
use hce_core::{
    ami, correlation_distances, extract_hierarchy, graph_cosine_distances, hce_profile,
    upgma_linkage_in_place,
};
use std::hint::black_box;

fn upgma(c: &mut Criterion) {
    let mut group = c.benchmark_group("upgma");
    group.sample_size(10);
    for n in [250, 1000, 2000] {
        let d = random_distances(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &d, |b, d| {
            b.iter_batched(|| d.clone(), upgma_linkage_in_place, criterion::BatchSize::LargeInput)
        });
    }
    group.finish();
}

fn graph_cosine(c: &mut Criterion) {
    let mut group = c.benchmark_group("graph_cosine");
    group.sample_size(10);
    for s0 in [10, 20] {
        let g = hnrg_graph(s0, 12.0, 2);
        group.bench_with_input(BenchmarkId::from_parameter(s0 * 64), &g, |b, g| {
            b.iter(|| graph_cosine_distances(black_box(g)))
        });
    }
    group.finish();
}

fn correlation(c: &mut Criterion) {
    let m = random_series(500, 600, 3);
    c.bench_function("correlation/500x600", |b| b.iter(|| correlation_distances(black_box(&m))));
}

fn hce(c: &mut Criterion) {
    let mut group = c.benchmark_group("hce");
    for n in [1000, 4000] {
        let l = random_linkage(n, 4);
        group.bench_with_input(BenchmarkId::new("profile", n), &l, |b, l| {
            b.iter(|| hce_profile(black_box(l)))
        });
        group.bench_with_input(BenchmarkId::new("hierarchy", n), &l, |b, l| {
            b.iter(|| extract_hierarchy(black_box(l)))
        });
    }
    group.finish();
}

fn ami_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("ami");
    for k in [10, 100] {
        let u = random_partition(5000, k, 5);
        let v = random_partition(5000, k, 6);
        group.bench_with_input(BenchmarkId::from_parameter(k), &(u, v), |b, (u, v)| {
            b.iter(|| ami(black_box(u), black_box(v)))
        });
    }
    group.finish();
}

criterion_group!(benches, upgma, graph_cosine, correlation, hce, ami_bench);
criterion_main!(benches);
