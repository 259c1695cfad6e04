use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use std::hint::black_box;

use shadow_core::heisenberg::{nilpotent_branch_coefficient, twisted_convolution, LaguerreSpherical};
use shadow_core::{HScheme, TestFunction, Window};

fn spherical(c: &mut Criterion) {
    let w = LaguerreSpherical::new(0.7, 3).unwrap();
    c.bench_function("laguerre_functional_equation", |b| {
        b.iter(|| w.functional_equation_residual(black_box(Complex64::new(0.4, -0.2)), Complex64::new(-0.3, 0.6)))
    });
    let h1 = TestFunction::isotropic_gaussian(2, 0.5);
    let h2 = TestFunction::isotropic_gaussian(2, 0.7).translated(&[0.2, -0.1]);
    let tc = twisted_convolution(&h1, &h2, 0.8).unwrap();
    c.bench_function("twisted_convolution_eval", |b| b.iter(|| tc.eval(black_box(Complex64::new(0.3, 0.4))).unwrap()));
}

fn nilpotent(c: &mut Criterion) {
    let h = HScheme::new();
    let w = Window::cube(3, 1.0);
    let mut group = c.benchmark_group("nilpotent_branch");
    group.sample_size(10);
    for dim in [1usize, 6, 12] {
        group.bench_function(format!("ansatz_{dim}"), |b| {
            b.iter(|| nilpotent_branch_coefficient(&h, &w, std::f64::consts::SQRT_2 / 4.0, 0, black_box(dim)).unwrap().lower_bound)
        });
    }
    group.finish();
}

criterion_group!(benches, spherical, nilpotent);
criterion_main!(benches);
