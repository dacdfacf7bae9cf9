use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use core_gauge::matching::max_weight_matching_with;
use core_gauge::{build_constraint_graph, core_bounds, max_weight_matching, region_statistics, Solver};
use core_gauge_bench::{two_by_two_market, weyl_cloud};

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("matching");
    for n in [100, 400, 2000] {
        let real = two_by_two_market(n, 1);
        group.bench_with_input(BenchmarkId::new("flow", n), &real, |b, r| {
            b.iter(|| max_weight_matching_with(black_box(r), Solver::Flow))
        });
        if n <= 400 {
            group.bench_with_input(BenchmarkId::new("hungarian", n), &real, |b, r| {
                b.iter(|| max_weight_matching_with(black_box(r), Solver::Hungarian))
            });
        }
    }
    group.finish();
}

fn core(c: &mut Criterion) {
    let mut group = c.benchmark_group("core");
    for n in [400, 2000] {
        let real = two_by_two_market(n, 2);
        let m = max_weight_matching(&real);
        group.bench_with_input(BenchmarkId::new("constraint_graph", n), &(&real, &m), |b, (r, m)| {
            b.iter(|| build_constraint_graph(black_box(r), black_box(m)).unwrap())
        });
        let g = build_constraint_graph(&real, &m).unwrap();
        group.bench_with_input(BenchmarkId::new("bounds", n), &g, |b, g| {
            b.iter(|| core_bounds(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("region_statistics");
    for dim in [2, 3] {
        let cloud = weyl_cloud(10_000, dim);
        group.bench_with_input(BenchmarkId::new("n=10000", dim), &cloud, |b, cl| {
            b.iter(|| region_statistics(black_box(cl), 0.01).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, matching, core, geometry);
criterion_main!(benches);
