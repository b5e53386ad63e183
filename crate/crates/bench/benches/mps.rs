use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fmps_bench::{gaussian_mps, gaussian_state};
use fmps_core::entropy::entropy_profile;
use fmps_core::funcgrid::FunctionSpec;
use fmps_core::mps::{from_state_vector, mps_inner, poly_to_mps, truncate, TruncationPolicy};
use fmps_core::polyapprox::fit_chebyshev;

fn tt_svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("from_state_vector");
    for n in [8, 12, 16] {
        let state = gaussian_state(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| {
            b.iter(|| from_state_vector(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn profiles(c: &mut Criterion) {
    let mut group = c.benchmark_group("entropy_profile");
    for n in [8, 12] {
        let state = gaussian_state(n);
        group.bench_with_input(BenchmarkId::new("dense", n), &state, |b, s| {
            b.iter(|| entropy_profile(black_box(s)).unwrap())
        });
        let mps = gaussian_mps(n);
        group.bench_with_input(BenchmarkId::new("mps", n), &mps, |b, m| {
            b.iter(|| entropy_profile(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn truncation(c: &mut Criterion) {
    let mps = gaussian_mps(14);
    let mut group = c.benchmark_group("truncate");
    for chi in [1, 2, 4] {
        let policy = TruncationPolicy::rank(chi);
        group.bench_with_input(BenchmarkId::from_parameter(chi), &policy, |b, p| {
            b.iter(|| truncate(black_box(&mps), p).unwrap())
        });
    }
    group.finish();
}

fn polynomial_encoding(c: &mut Criterion) {
    let spec = FunctionSpec::gaussian(0.0, 1.0);
    let domain = spec.default_domain();
    let mut group = c.benchmark_group("poly_to_mps");
    for p in [4, 10, 20] {
        let poly = fit_chebyshev(&spec, &domain, p).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(p), &poly, |b, poly| {
            b.iter(|| poly_to_mps(black_box(poly), 20, &domain).unwrap())
        });
    }
    group.finish();
}

fn overlap(c: &mut Criterion) {
    let exact = gaussian_mps(16);
    let approx = truncate(&exact, &TruncationPolicy::rank(2)).unwrap().state;
    c.bench_function("mps_inner/16", |b| {
        b.iter(|| mps_inner(black_box(&exact), black_box(&approx)).unwrap())
    });
}

criterion_group!(
    benches,
    tt_svd,
    profiles,
    truncation,
    polynomial_encoding,
    overlap
);
criterion_main!(benches);
