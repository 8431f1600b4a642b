//! Parallel vs sequential timings for the three hot kernels: raw reductions,
//! curvature quadrature, and chart zero scans.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use vmoidx::fields::{catalog_field, find_zeros, ZeroFindParams};
use vmoidx::geometry::{QuadratureSpec, Surface};
use vmoidx::par::{sum_over, sum_over_seq};

fn bench_sum_over(c: &mut Criterion) {
    let mut group = c.benchmark_group("sum_over");
    let term = |i: usize| ((i as f64) * 1e-3).sin().atan().exp().ln_1p();
    for n in [10_000usize, 1_000_000] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| sum_over(black_box(n), true, term))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| sum_over_seq(black_box(n), term))
        });
    }
    group.finish();
}

fn bench_curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("gauss_bonnet_chi");
    group.sample_size(20);
    for name in ["sphere", "torus"] {
        let s = Surface::by_name(name).unwrap();
        group.bench_function(BenchmarkId::new("parallel", name), |b| {
            b.iter(|| s.gauss_bonnet_chi(QuadratureSpec::new(black_box(192))).unwrap())
        });
        group.bench_function(BenchmarkId::new("sequential", name), |b| {
            b.iter(|| s.gauss_bonnet_chi(QuadratureSpec::sequential(black_box(192))).unwrap())
        });
    }
    group.finish();
}

fn bench_zero_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_zeros");
    group.sample_size(20);
    let cases = [("disk", "hyperbolic"), ("sphere", "rotation-z")];
    for (sname, fname) in cases {
        let s = Surface::by_name(sname).unwrap();
        let f = catalog_field(&s, fname).unwrap();
        for parallel in [true, false] {
            let label = if parallel { "parallel" } else { "sequential" };
            let params = ZeroFindParams { parallel, ..Default::default() };
            group.bench_function(BenchmarkId::new(label, format!("{sname}/{fname}")), |b| {
                b.iter(|| find_zeros(&s, &f, black_box(&params)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sum_over, bench_curvature, bench_zero_scan);
criterion_main!(benches);
