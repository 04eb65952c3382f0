use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mfhh_core::ainfty::check_ainfty;
use mfhh_core::exactpoly::{milnor_algebra, parse_poly_infer, tjurina_algebra, DEFAULT_ORDER_CAP};
use mfhh_core::matfact::minimal_model;

fn milnor(c: &mut Criterion) {
    let (w, _) = parse_poly_infer("x^5 + x^2*y^2 + y^5").unwrap();
    c.bench_function("milnor x5+x2y2+y5", |b| {
        b.iter(|| milnor_algebra(black_box(&w), None, DEFAULT_ORDER_CAP).unwrap())
    });
    let (w, _) = parse_poly_infer("x^3 + y^3 + z^3 + w^3").unwrap();
    c.bench_function("tjurina 4-var cubic", |b| {
        b.iter(|| tjurina_algebra(black_box(&w), None, DEFAULT_ORDER_CAP).unwrap())
    });
}

fn transfer(c: &mut Criterion) {
    let mut group = c.benchmark_group("transfer");
    group.sample_size(10);
    let (w, vars) = parse_poly_infer("x^4").unwrap();
    group.bench_function("minimal model x4 to arity 6", |b| {
        b.iter(|| minimal_model(black_box(&w), &vars, None, 6).unwrap())
    });
    let (w, vars) = parse_poly_infer("x^3 + y^3").unwrap();
    group.bench_function("minimal model x3+y3 to arity 5", |b| {
        b.iter(|| minimal_model(black_box(&w), &vars, None, 5).unwrap())
    });
    let model = minimal_model(&w, &vars, None, 5).unwrap().algebra;
    group.bench_function("relations x3+y3 to arity 5", |b| {
        b.iter(|| check_ainfty(black_box(&model), 5))
    });
    group.finish();
}

criterion_group!(benches, milnor, transfer);
criterion_main!(benches);
