use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use decay_core::bounds::{envelope, laplace_entry_bound, cauchy_entry_bound};
use decay_core::kron::{cauchy_kron_bound, laplace_kron_bound};
use decay_core::measures::{cauchy_catalog, laplace_catalog};
use decay_core::{make_test_matrix, BandedContext, DenseOracle, KroneckerContext, KroneckerSum, SeriesFunction, SeriesOracle, SpectrumSource, TestMatrixKind};

fn envelope_eval(c: &mut Criterion) {
    c.bench_function("envelope 200 distances", |b| {
        b.iter(|| (0..200).map(|d| envelope(black_box(3.9995), d as f64)).sum::<f64>())
    });
}

fn banded_bounds(c: &mut Criterion) {
    let m = make_test_matrix(TestMatrixKind::Tridiag, 200).unwrap();
    let ctx = BandedContext::from_matrix(&m, SpectrumSource::Exact).unwrap();
    let phi1 = laplace_catalog("phi1").unwrap();
    let isq = cauchy_catalog("inv_sqrt").unwrap();
    c.bench_function("laplace phi1 d=20", |b| b.iter(|| laplace_entry_bound(&ctx, &phi1, black_box(20.0)).unwrap()));
    c.bench_function("cauchy inv_sqrt d=20", |b| b.iter(|| cauchy_entry_bound(&ctx, &isq, black_box(20.0)).unwrap()));
}

fn kron_bounds(c: &mut Criterion) {
    let m = make_test_matrix(TestMatrixKind::Tridiag, 20).unwrap();
    let sum = KroneckerSum::new(vec![m.clone(), m]).unwrap();
    let t = sum.delinearize(93).unwrap();
    let k = sum.delinearize(250).unwrap();
    let ctx = KroneckerContext::new(sum, SpectrumSource::Exact).unwrap();
    let phi1 = laplace_catalog("phi1").unwrap();
    let isq = cauchy_catalog("inv_sqrt").unwrap();
    c.bench_function("kron laplace phi1", |b| b.iter(|| laplace_kron_bound(&ctx, &phi1, black_box(&k), &t).unwrap()));
    c.bench_function("kron cauchy inv_sqrt", |b| b.iter(|| cauchy_kron_bound(&ctx, &isq, black_box(&k), &t).unwrap()));
}

fn oracles(c: &mut Criterion) {
    let m = make_test_matrix(TestMatrixKind::Tridiag, 200).unwrap();
    let mut g = c.benchmark_group("oracle n=200");
    g.sample_size(20);
    g.bench_function("dense eigendecomposition", |b| b.iter(|| DenseOracle::new(black_box(&m)).unwrap()));
    let series = SeriesOracle::new(&m).unwrap();
    g.bench_function("series inv_sqrt column", |b| {
        b.iter(|| series.column(SeriesFunction::InvPow { sigma: 0.5 }, black_box(126)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, envelope_eval, banded_bounds, kron_bounds, oracles);
criterion_main!(benches);
