use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hamroot_bench::{default_construction, plane_point, sites};
use hamroot_core::dynamics::{enumerate_fixed_points, newton_fixed_point, EnumerationOptions, NewtonOptions};
use hamroot_core::{maps, Params};
use std::hint::black_box;

fn phi_evaluation(c: &mut Criterion) {
    let construction = default_construction();
    let mut group = c.benchmark_group("phi");
    for (name, z) in sites() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &z, |b, z| {
            b.iter(|| construction.phi(black_box(z)).unwrap())
        });
    }
    group.finish();
}

fn newton(c: &mut Criterion) {
    let construction = default_construction();
    let phi = maps::phi(&construction);
    let opts = NewtonOptions::from_params(&Params::default());
    let seed = plane_point(0.49, 0.05);
    c.bench_function("newton_sixth_iterate", |b| {
        b.iter(|| newton_fixed_point(phi.as_ref(), 6, black_box(&seed), &opts))
    });
}

fn enumeration(c: &mut Criterion) {
    let construction = default_construction();
    let phi = maps::phi(&construction);
    let opts = EnumerationOptions::from_params(&Params::default(), 2);
    let mut group = c.benchmark_group("enumerate");
    group.sample_size(10);
    group.bench_function("phi_order6_grid2", |b| b.iter(|| enumerate_fixed_points(phi.as_ref(), 6, &opts)));
    group.finish();
}

criterion_group!(benches, phi_evaluation, newton, enumeration);
criterion_main!(benches);
