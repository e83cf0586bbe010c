use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use scatter_core::equidist::truncated_state;
use scatter_core::greens::{deficiency_constants, secular_cutoff};
use scatter_core::lattice::{annulus_points, sieve_norms};
use scatter_core::scattering::{find_new_eigenvalues, Gap, SolverOptions};
use scatter_core::sieve::{classify, FilterParams};
use scatter_core::{Aspect, LatticePoint, Preset, SecularKernel, SecularProblem, TorusGeometry, C64};

fn lattice(c: &mut Criterion) {
    c.bench_function("sieve_norms 1e5", |b| b.iter(|| sieve_norms(black_box(1e5), Aspect::SQUARE).unwrap()));
    c.bench_function("annulus 1e5 +- 10", |b| b.iter(|| annulus_points(black_box(1e5 + 0.5), 10.0, Aspect::SQUARE)));
}

fn greens(c: &mut Criterion) {
    let geom = TorusGeometry::default_square();
    c.bench_function("deficiency constants R = 1e6", |b| b.iter(|| deficiency_constants(black_box(&geom), 1e6).unwrap()));
    let kernel = SecularKernel::new(&geom, -1e4, 101.0, secular_cutoff(101.0)).unwrap();
    c.bench_function("secular kernel eval", |b| b.iter(|| kernel.eval(black_box(37.3)).unwrap()));
}

fn solver(c: &mut Criterion) {
    let geom = TorusGeometry::default_square();
    let problem = SecularProblem::new(&geom, -1e4, 101.0, secular_cutoff(101.0)).unwrap();
    let u = Preset::Rank2Sample.extension();
    let opts = SolverOptions::default();
    c.bench_function("roots in one gap", |b| {
        b.iter(|| find_new_eigenvalues(Gap { lo: 50.0, hi: 52.0 }, &problem, &u, &opts).unwrap())
    });
}

fn sieve_and_states(c: &mut Criterion) {
    let geom = TorusGeometry::default_square();
    let table = sieve_norms(2e4, Aspect::SQUARE).unwrap();
    let params = FilterParams::default();
    c.bench_function("classify 1e4 midpoints", |b| {
        let mids = table.gap_midpoints(9000.0, 9200.0);
        b.iter(|| mids.iter().filter(|&&l| classify(l, &geom, &table, &params).unwrap().linf).count())
    });
    let d = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
    let state = truncated_state(10000.5, d, &geom, params.window(10000.5)).unwrap();
    c.bench_function("truncated matrix element", |b| b.iter(|| state.matrix_element(black_box(LatticePoint::new(1, 2)))));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = lattice, greens, solver, sieve_and_states
}
criterion_main!(benches);
