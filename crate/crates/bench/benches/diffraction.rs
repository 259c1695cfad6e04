use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use shadow_core::{meyer_diffraction, poisson_triple_check, spherical_diffraction, PointGroup, Scheme, TestFunction, Window};

fn peaks(c: &mut Criterion) {
    let chain = Scheme::sqrt2_chain();
    let w = Window::interval(-1.0, 1.0);
    c.bench_function("meyer_sqrt2_chain_r8", |b| b.iter(|| meyer_diffraction(&chain, &w, black_box(8.0)).unwrap().atoms.len()));

    let square = Scheme::sqrt2_square();
    let k = PointGroup::dihedral(4);
    let w2 = Window::cube(2, 1.0);
    let mut group = c.benchmark_group("spherical");
    group.sample_size(10);
    group.bench_function("d4_sqrt2_square_r6", |b| b.iter(|| spherical_diffraction(&square, &k, &w2, black_box(6.0)).unwrap().atoms.len()));
    group.finish();
}

fn poisson(c: &mut Criterion) {
    let chain = Scheme::sqrt2_chain();
    let g = TestFunction::gaussian(0.5);
    let mut group = c.benchmark_group("poisson_triple");
    group.sample_size(10);
    group.bench_function("sqrt2_gaussian", |b| b.iter(|| poisson_triple_check(&chain, &g, &g, black_box(6.0)).unwrap().max_rel_err));
    group.finish();
}

criterion_group!(benches, peaks, poisson);
criterion_main!(benches);
