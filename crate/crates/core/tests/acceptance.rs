//! End-to-end acceptance checks. Each check prints one `PASS`/`FAIL` line;
//! the binary exits non-zero if any check fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shadow_core::autocorr::{empirical_autocorr, pair_radial, radialize, theoretical_autocorr_coeff, ApproxSequence, Family};
use shadow_core::diffraction::{
    calibrate_normalization, consistency_harness, meyer_diffraction, periodization_norm_bound_check, poisson_triple_check,
    spherical_diffraction,
};
use shadow_core::harmonic::{nested_integral, weighted_norm, Metric, PointGroup, TestFunction, WeightedNormParams};
use shadow_core::heisenberg::{
    associativity_residual, h_inv, h_mul, lattice_sum_identity_check, nilpotent_branch_coefficient, HPoint, HScheme,
    LaguerreSpherical, LatticeSumOptions,
};
use shadow_core::heisenberg::branches::nilpotent_constrained_value;
use shadow_core::lattice::{enumerate_points, Region};
use shadow_core::scheme::{cut_and_project, Scheme, Window};
use shadow_core::{approx_sequence_diagnostic, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn poisson_triple() -> Result<Outcome> {
    let start = Instant::now();
    let z2 = Scheme::scaled_integer(1, 1, 1.0)?;
    let tent = TestFunction::tent();
    let a = poisson_triple_check(&z2, &tent, &tent, 6.0)?;
    let tent_err = [a.lhs_lattice, a.rhs_dual, a.mid_quadrature].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let g = TestFunction::gaussian(0.5);
    let b = poisson_triple_check(&Scheme::sqrt2_chain(), &g, &g, 6.0)?;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        tent_err <= 1e-9 && b.max_rel_err <= 1e-6 && secs < 10.0,
        format!("tent on Z^2 max |v-1| = {tent_err:.3e}; sqrt2 Gaussian max rel err = {:.3e}; {secs:.2} s", b.max_rel_err),
    )
}

fn calibration() -> Result<Outcome> {
    let c = calibrate_normalization()?;
    let guard = 4.0 * (1.0 - 1e-9);
    outcome(
        (c.exponent - 1.0).abs() <= 1e-9 && c.calibrated_rel_err <= 1e-9 && c.ratio_plus_one >= guard && c.ratio_minus_one >= guard,
        format!(
            "exponent = {:.12}; calibrated rel err = {:.3e}; off-by-one ratios = {:.3}, {:.3}",
            c.exponent, c.calibrated_rel_err, c.ratio_plus_one, c.ratio_minus_one
        ),
    )
}

fn autocorrelation_vs_overlap() -> Result<Outcome> {
    let start = Instant::now();
    let s = Scheme::sqrt2_chain();
    let w = Window::interval(-1.0, 1.0);
    let t = 1e4;
    let ms = cut_and_project(&s, &w, &Region::interval(-t - 6.0, t + 6.0))?;
    let ac = empirical_autocorr(&ms, &Region::interval(-t, t), 5.0)?;
    let candidates = enumerate_points(s.lattice(), &Region::Box { lo: vec![-5.0, -2.0], hi: vec![5.0, 2.0] })?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for p in &candidates {
        let oracle = theoretical_autocorr_coeff(&s, &w, &p.coords).value;
        worst = worst.max((ac.coefficient(&p.coords) - oracle).abs());
        checked += 1;
    }
    // atoms the oracle would not predict
    for a in &ac.atoms {
        worst = worst.max((a.coeff - theoretical_autocorr_coeff(&s, &w, &a.key).value).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 5e-3 && secs < 30.0, format!("{checked} differences, max |c - overlap/covol| = {worst:.3e}; {secs:.2} s"))
}

fn meyer_vs_empirical() -> Result<Outcome> {
    let s = Scheme::sqrt2_chain();
    let w = Window::interval(-1.0, 1.0);
    let t = 1e4;
    let f = TestFunction::gaussian(0.4);
    let margin = f.autocorrelation().support_radius() + 1.0;
    let ms = cut_and_project(&s, &w, &Region::interval(-t - margin, t + margin))?;
    let diff = meyer_diffraction(&s, &w, 8.0)?;
    let rep = consistency_harness(&ms, &Region::interval(-t, t), &PointGroup::trivial(1), &f, &diff)?;
    outcome(
        rep.rel_gap <= 1e-2 && rep.trivial_rel_gap <= 1e-3,
        format!(
            "empirical = {:.6}, theoretical = {:.6}, rel gap = {:.3e}; trivial peak vs density^2 rel gap = {:.3e}",
            rep.empirical, rep.theoretical, rep.rel_gap, rep.trivial_rel_gap
        ),
    )
}

fn dihedral_branch() -> Result<Outcome> {
    let s = Scheme::sqrt2_square();
    let k = PointGroup::dihedral(4);
    let w = Window::cube(2, 1.0);
    let f = TestFunction::isotropic_gaussian(2, 0.3);
    let g = f.autocorrelation();
    let cutoff = g.support_radius() * (1.0 + 1e-9);
    let t = 500.0;
    let ms = cut_and_project(&s, &w, &Region::cube(2, t + cutoff + 1.0))?;
    let ac = radialize(&empirical_autocorr(&ms, &Region::cube(2, t), cutoff)?, &k);
    let empirical = pair_radial(&ac, &g)?.re;
    let diff = spherical_diffraction(&s, &k, &w, 14.0)?;
    let theoretical: f64 = diff
        .atoms
        .iter()
        .map(|a| a.intensity * shadow_core::spherical_ft(&f, &k, &a.label).map(|v| v.norm_sqr()).unwrap_or(f64::NAN))
        .sum();
    let gap = rel(empirical, theoretical);
    outcome(
        gap <= 2e-2,
        format!("radial pairing = {empirical:.6}, orbit-summed prediction = {theoretical:.6}, rel gap = {gap:.3e}, {} orbits", diff.atoms.len()),
    )
}

fn heisenberg_algebra() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut point = || HPoint::new(Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)), rng.random_range(-3.0..3.0));
    let mut axiom = 0.0f64;
    let dist = |a: HPoint, b: HPoint| (a.q - b.q).norm().max((a.z - b.z).abs());
    for _ in 0..1000 {
        let (a, b, c) = (point(), point(), point());
        axiom = axiom.max(dist(h_mul(h_mul(a, b), c), h_mul(a, h_mul(b, c))));
        axiom = axiom.max(dist(h_mul(a, h_inv(a)), HPoint::IDENTITY));
        axiom = axiom.max(dist(h_mul(HPoint::IDENTITY, a), a));
    }
    let pairs = HScheme::new().verify_cocycle_closure(5);
    let h1 = TestFunction::isotropic_gaussian(2, 0.5).translated(&[0.2, 0.0]);
    let h2 = TestFunction::isotropic_gaussian(2, 0.6).translated(&[-0.1, 0.3]);
    let h3 = TestFunction::isotropic_gaussian(2, 0.4).translated(&[0.0, -0.2]);
    let assoc = associativity_residual(&h1, &h2, &h3, 0.7, Complex64::new(0.3, -0.4), 1e-14)?;
    let closure = match &pairs {
        Ok(n) => format!("{n} pairs closed exactly"),
        Err((x, y)) => format!("closure fails at {x:?}, {y:?}"),
    };
    outcome(axiom <= 1e-12 && pairs.is_ok() && assoc <= 1e-7, format!("group axioms {axiom:.3e}; {closure}; twisted associativity {assoc:.3e}"))
}

fn laguerre_oracle() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut edc = true;
    for (i, lambda) in [0.5, -0.8, 1.3].into_iter().enumerate() {
        for m in 0..=4 {
            let w = LaguerreSpherical::new(lambda, m)?;
            worst = worst.max(w.functional_equation_check(25, 2.0, 100 + i as u64 * 10 + m as u64));
            edc &= w.edc_check(8.0, 4000).passed;
        }
    }
    outcome(worst <= 1e-6 && edc, format!("max functional-equation residual {worst:.3e}; envelope {}", if edc { "holds" } else { "violated" }))
}

fn lattice_sum_identity() -> Result<Outcome> {
    let start = Instant::now();
    let h = HScheme::new();
    let gauss = |s: f64| TestFunction::isotropic_gaussian(2, s).tensor(&TestFunction::gaussian(s));
    let f = gauss(0.3);
    let r = gauss(0.3).translated(&[0.1, 0.0, 0.0]);
    let rep = lattice_sum_identity_check(&h, &f, &r, &LatticeSumOptions::default())?;
    let secs = start.elapsed().as_secs_f64();
    let abs_gap = (rep.lattice_sum - rep.mc_quotient_norm).abs();
    outcome(
        rep.rel_gap <= 5e-2 && abs_gap <= 3.0 * rep.mc_stderr && secs < 300.0,
        format!(
            "lattice sum = {:.6e}, Monte Carlo = {:.6e} ± {:.2e} ({} samples), rel gap = {:.3e} = {:.2} stderr; {secs:.1} s",
            rep.lattice_sum,
            rep.mc_quotient_norm,
            rep.mc_stderr,
            rep.samples,
            rep.rel_gap,
            abs_gap / rep.mc_stderr
        ),
    )
}

fn nilpotent_branch() -> Result<Outcome> {
    let h = HScheme::new();
    let w = Window::cube(3, 1.0);
    // λ₂ = −√2/4 keeps the central window transform away from its zeros
    let lambda1 = SQRT_2 / 4.0;
    let mut monotone = true;
    let mut min_eigenvalue = f64::INFINITY;
    let mut last = 0.0;
    for m in 0..=2 {
        let c = nilpotent_branch_coefficient(&h, &w, lambda1, m, 12)?;
        monotone &= c.by_dimension.windows(2).all(|p| p[1] >= p[0]);
        min_eigenvalue = min_eigenvalue.min(c.min_eigenvalue);
        last = c.lower_bound;
    }
    let one = nilpotent_branch_coefficient(&h, &w, lambda1, 0, 1)?;
    let sigma = 1.0 / (2.0 * PI * one.lambda2.abs()).sqrt();
    let direct = nilpotent_constrained_value(&w, lambda1, 0, &TestFunction::isotropic_gaussian(2, sigma), 12.0)?;
    let err = rel(direct, one.lower_bound);
    outcome(
        monotone && err <= 1e-9 && one.lower_bound > 0.0 && min_eigenvalue >= -1e-8,
        format!(
            "m = 0..2 values over dims 1..12 {} (m = 2 at dim 12: {last:.6e}); dim-1 {:.6e} vs direct rel {err:.3e}; min eigenvalue {min_eigenvalue:.3e}",
            if monotone { "nondecreasing" } else { "NOT monotone" },
            one.lower_bound,
        ),
    )
}

fn weighted_norm_bound() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let alpha = 1.0;
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    let mut product_residual = 0.0f64;
    for scheme in [Scheme::scaled_integer(1, 1, 1.0)?, Scheme::sqrt2_chain()] {
        let params = WeightedNormParams::for_scheme(alpha, Metric::L1, &scheme)?;
        for _ in 0..100 {
            let spline = |rng: &mut ChaCha8Rng| {
                TestFunction::bspline(rng.random_range(1..=4), rng.random_range(0.3..1.5)).translated(&[rng.random_range(-0.5..0.5)])
            };
            let f = spline(&mut rng);
            let r = spline(&mut rng);
            let rep = periodization_norm_bound_check(&f, &r, &params, &scheme)?;
            failures += usize::from(!rep.passed);
            worst_ratio = worst_ratio.max(rep.lhs / rep.rhs);
        }
    }
    let plain = WeightedNormParams::new(alpha, Metric::L1)?;
    for _ in 0..10 {
        let f = TestFunction::bspline(rng.random_range(1..=4), rng.random_range(0.3..1.5)).translated(&[rng.random_range(-0.5..0.5)]);
        let r = TestFunction::bspline(rng.random_range(1..=4), rng.random_range(0.3..1.5)).translated(&[rng.random_range(-0.5..0.5)]);
        let fr = f.tensor(&r);
        let (lo, hi) = fr.support_box();
        let integrand = |x: &[f64]| fr.eval(x).norm_sqr() * (alpha * (x[0].abs() + x[1].abs())).exp();
        let joint = nested_integral(&integrand, &lo, &hi, 1e-12)?.sqrt();
        let product = weighted_norm(&f, &plain)? * weighted_norm(&r, &plain)?;
        product_residual = product_residual.max(rel(joint, product)).max(rel(weighted_norm(&fr, &plain)?, product));
    }
    outcome(
        failures == 0 && product_residual <= 1e-7,
        format!("{failures} of 200 pairs violate the bound (max lhs/rhs {worst_ratio:.3e}); product rule residual {product_residual:.3e}"),
    )
}

fn good_approximation() -> Result<Outcome> {
    let xi = SQRT_2 / 4.0;
    let scales = vec![10.0, 100.0, 1000.0];
    let values = approx_sequence_diagnostic(&ApproxSequence::new(Family::Boxes, scales.clone())?, &[xi])?;
    let ok = values.iter().zip(&scales).all(|(v, t)| *v <= 1.0 / (2.0 * PI * xi * t));
    let shown: Vec<String> = values.iter().zip(&scales).map(|(v, t)| format!("t={t}: {v:.3e} <= {:.3e}", 1.0 / (2.0 * PI * xi * t))).collect();
    outcome(ok, shown.join("; "))
}

fn main() {
    let checks: [(&str, fn() -> Result<Outcome>); 11] = [
        ("poisson triple equality", poisson_triple),
        ("normalization calibration", calibration),
        ("autocorrelation vs window overlap", autocorrelation_vs_overlap),
        ("meyer formula vs empirical diffraction", meyer_vs_empirical),
        ("dihedral virtually abelian branch", dihedral_branch),
        ("heisenberg algebra", heisenberg_algebra),
        ("laguerre spherical oracle", laguerre_oracle),
        ("heisenberg lattice-sum identity", lattice_sum_identity),
        ("nilpotent branch coefficient", nilpotent_branch),
        ("weighted norm bound", weighted_norm_bound),
        ("good approximation diagnostic", good_approximation),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let (passed, detail) = match check() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!("acceptance {:>2} {} {name}: {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
