//! Twisted convolution on `ℂ` and the partial central transform.
//!
//! With `χ₂(t) = e^{2πiλt}` the twisted convolution is
//! `(h₁ ∗_χ h₂)(x) = ∫ h₁(x − y) h₂(y) χ₂(Im(ȳ x)) dy`. Since
//! `Im(ȳx) = y_re x_im − y_im x_re` is linear in `y`, the integrand of two
//! tensor-product terms splits into two one-dimensional integrals, which is how
//! [`TwistedConvolution::eval`] works. [`Cubature`] handles the general case
//! where one side is only known as an evaluator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonic::test_function::{Factor1D, Kernel1D, Term};
use crate::harmonic::TestFunction;
use crate::quadrature::{adaptive_piecewise, gauss_legendre};
use crate::scheme::Window;

const ONE_D_TOL: f64 = 1e-12;

/// `h₁ ∗_χ h₂` for test functions on `ℂ ≅ ℝ²`.
#[derive(Clone, Debug)]
pub struct TwistedConvolution {
    pub h1: TestFunction,
    pub h2: TestFunction,
    pub lambda: f64,
}

pub fn twisted_convolution(h1: &TestFunction, h2: &TestFunction, lambda: f64) -> Result<TwistedConvolution> {
    for h in [h1, h2] {
        if h.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: h.dim() });
        }
    }
    Ok(TwistedConvolution { h1: h1.clone(), h2: h2.clone(), lambda })
}

/// The variant `∫ h₁(y) h₂(x − y) χ₂(Im(ȳ x)) dy`. Substituting `y ↦ x − y`
/// turns it into the main convention with `λ` replaced by `−λ`.
pub fn twisted_convolution_alt(h1: &TestFunction, h2: &TestFunction, lambda: f64) -> Result<TwistedConvolution> {
    twisted_convolution(h1, h2, -lambda)
}

fn interval_integral(f1: &Factor1D, f2: &Factor1D, x: f64, omega: f64) -> Result<Complex64> {
    // ∫ f1(x − u) f2(u) e^{2πiωu} du
    let w1 = f1.support_half_width();
    let w2 = f2.support_half_width();
    let lo = (f2.shift - w2).max(x - f1.shift - w1);
    let hi = (f2.shift + w2).min(x - f1.shift + w1);
    if !(hi > lo) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut breaks = vec![lo, hi];
    breaks.extend(f2.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
    breaks.extend(f1.breakpoints().into_iter().map(|b| x - b).filter(|b| *b > lo && *b < hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let scale = f1.eval(f1.shift).abs().max(1e-300) * f2.eval(f2.shift).abs().max(1e-300);
    adaptive_piecewise(
        |u| Complex64::from_polar(f1.eval(x - u) * f2.eval(u), 2.0 * PI * omega * u),
        &breaks,
        ONE_D_TOL * scale.max(1.0),
    )
}

impl TwistedConvolution {
    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for s in self.h1.terms() {
            for t in self.h2.terms() {
                let re = interval_integral(&s.factors[0], &t.factors[0], x.re, self.lambda * x.im)?;
                if re == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let im = interval_integral(&s.factors[1], &t.factors[1], x.im, -self.lambda * x.re)?;
                acc += s.coeff * t.coeff * re * im;
            }
        }
        Ok(acc)
    }

    /// Axis box containing the support.
    pub fn support_box(&self) -> ([f64; 2], [f64; 2]) {
        let (l1, h1) = self.h1.support_box();
        let (l2, h2) = self.h2.support_box();
        ([l1[0] + l2[0], l1[1] + l2[1]], [h1[0] + h2[0], h1[1] + h2[1]])
    }
}

/// Tensor Gauss–Legendre cubature on a rectangle, for integrands known only
/// pointwise.
#[derive(Clone, Copy, Debug)]
pub struct Cubature {
    pub panels: usize,
    pub nodes: usize,
}

impl Default for Cubature {
    fn default() -> Self {
        Self { panels: 8, nodes: 16 }
    }
}

impl Cubature {
    pub fn integrate(&self, f: impl Fn(f64, f64) -> Complex64, lo: [f64; 2], hi: [f64; 2]) -> Complex64 {
        if !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Complex64::new(0.0, 0.0);
        }
        let rule = gauss_legendre(self.nodes);
        let axis = |a: f64, b: f64| -> Vec<(f64, f64)> {
            let h = (b - a) / self.panels as f64;
            (0..self.panels)
                .flat_map(|p| {
                    let mid = a + h * (p as f64 + 0.5);
                    rule.nodes.iter().zip(&rule.weights).map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
                })
                .collect()
        };
        let xs = axis(lo[0], hi[0]);
        let ys = axis(lo[1], hi[1]);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(u, wu) in &xs {
            for &(v, wv) in &ys {
                acc += f(u, v) * (wu * wv);
            }
        }
        acc
    }

    /// `∫_{box} g₁(x − y) g₂(y) χ₂(Im(ȳ x)) dy`; the box must contain the
    /// effective support of the integrand.
    pub fn twisted(
        &self,
        g1: impl Fn(Complex64) -> Complex64,
        g2: impl Fn(Complex64) -> Complex64,
        lo: [f64; 2],
        hi: [f64; 2],
        lambda: f64,
        x: Complex64,
    ) -> Complex64 {
        self.integrate(
            |u, v| {
                let y = Complex64::new(u, v);
                let phase = 2.0 * PI * lambda * (y.conj() * x).im;
                g1(x - y) * g2(y) * Complex64::from_polar(1.0, phase)
            },
            lo,
            hi,
        )
    }

    /// [`Cubature::twisted`] with the panel count doubled until two successive
    /// values agree to `tol`.
    #[allow(clippy::too_many_arguments)]
    pub fn twisted_adaptive(
        &self,
        g1: impl Fn(Complex64) -> Complex64,
        g2: impl Fn(Complex64) -> Complex64,
        lo: [f64; 2],
        hi: [f64; 2],
        lambda: f64,
        x: Complex64,
        tol: f64,
    ) -> Result<Complex64> {
        let mut cub = *self;
        let mut prev = cub.twisted(&g1, &g2, lo, hi, lambda, x);
        for _ in 0..5 {
            cub.panels *= 2;
            let next = cub.twisted(&g1, &g2, lo, hi, lambda, x);
            if (next - prev).norm() <= tol * next.norm().max(1.0) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature(format!("twisted cubature did not settle at x = {x}")))
    }
}

/// `|((h₁ ∗ h₂) ∗ h₃)(x) − (h₁ ∗ (h₂ ∗ h₃))(x)|`, with the inner convolutions
/// evaluated separably and the outer one by adaptive cubature over the
/// effective support (`support_tol`) of the plain factor.
pub fn associativity_residual(
    h1: &TestFunction,
    h2: &TestFunction,
    h3: &TestFunction,
    lambda: f64,
    x: Complex64,
    support_tol: f64,
) -> Result<f64> {
    let left_inner = twisted_convolution(h1, h2, lambda)?;
    let right_inner = twisted_convolution(h2, h3, lambda)?;
    let cub = Cubature::default();
    let eval = |h: &TestFunction, z: Complex64| h.eval(&[z.re, z.im]);
    let inner = |tc: &TwistedConvolution, z: Complex64| tc.eval(z).unwrap_or(Complex64::new(f64::NAN, 0.0));

    let (lo, hi) = h3.effective_support_box(support_tol);
    let left = cub.twisted_adaptive(|z| inner(&left_inner, z), |z| eval(h3, z), [lo[0], lo[1]], [hi[0], hi[1]], lambda, x, 1e-10)?;
    // y ranges over the support of h₂ ∗ h₃
    let (l2, u2) = h2.effective_support_box(support_tol);
    let lo = [lo[0] + l2[0], lo[1] + l2[1]];
    let hi = [hi[0] + u2[0], hi[1] + u2[1]];
    let right = cub.twisted_adaptive(|z| eval(h1, z), |z| inner(&right_inner, z), lo, hi, lambda, x, 1e-10)?;
    let r = (left - right).norm();
    if r.is_nan() {
        return Err(Error::Quadrature("inner twisted convolution failed".into()));
    }
    Ok(r)
}

/// `r_χ₂(q) = ∫ r(q, t) e^{−2πiλt} dt` for `r` on `ℂ ⊕ ℝ`, in closed form:
/// the central factor of each term is replaced by its Fourier transform at `λ`.
pub fn partial_central_transform(r: &TestFunction, lambda: f64) -> Result<TestFunction> {
    if r.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: r.dim() });
    }
    let terms = r
        .terms()
        .iter()
        .map(|t| Term { coeff: t.coeff * t.factors[2].fourier_transform(lambda), factors: t.factors[..2].to_vec() })
        .collect();
    Ok(TestFunction::from_terms(2, terms))
}

/// The indicator of a box window (or a disjoint union of boxes) as a test
/// function.
pub fn window_test_function(window: &Window) -> Result<TestFunction> {
    match window {
        Window::Empty { dim } => Ok(TestFunction::zero(*dim)),
        Window::Box { lo, hi } => {
            let factors = lo
                .iter()
                .zip(hi)
                .map(|(l, h)| Factor1D { kernels: vec![Kernel1D::Box { half_width: 0.5 * (h - l) }], shift: 0.5 * (h + l) })
                .collect();
            Ok(TestFunction::from_terms(lo.len(), vec![Term { coeff: Complex64::new(1.0, 0.0), factors }]))
        }
        Window::Union { parts } => {
            let mut acc = TestFunction::zero(window.dim());
            for p in parts {
                acc = acc.add(&window_test_function(p)?);
            }
            Ok(acc)
        }
        _ => Err(Error::InvalidWindow("only box windows have a test-function indicator".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    fn gaussian2(sigma: f64, shift: [f64; 2]) -> TestFunction {
        TestFunction::isotropic_gaussian(2, sigma).translated(&shift)
    }

    #[test]
    fn zero_frequency_is_ordinary_convolution() {
        let h1 = gaussian2(0.7, [0.3, -0.2]);
        let h2 = TestFunction::bspline(2, 0.8).tensor(&TestFunction::gaussian(0.5));
        let tc = twisted_convolution(&h1, &h2, 0.0).unwrap();
        let conv = h1.convolve(&h2);
        for x in [Complex64::new(0.0, 0.0), Complex64::new(0.4, -1.1), Complex64::new(-1.5, 0.9)] {
            let a = tc.eval(x).unwrap();
            let b = conv.eval(&[x.re, x.im]);
            assert!((a - b).norm() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn associative_on_gaussians() {
        let h1 = gaussian2(0.5, [0.2, 0.0]);
        let h2 = gaussian2(0.6, [-0.1, 0.3]);
        let h3 = gaussian2(0.4, [0.0, -0.2]);
        let r = associativity_residual(&h1, &h2, &h3, 0.7, Complex64::new(0.3, -0.4), 1e-14).unwrap();
        assert!(r <= 1e-7, "{r}");
    }

    #[test]
    fn zero_input_gives_zero() {
        let tc = twisted_convolution(&gaussian2(1.0, [0.0, 0.0]), &TestFunction::zero(2), 0.7).unwrap();
        assert_eq!(tc.eval(Complex64::new(0.3, 0.1)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn separable_evaluation_matches_cubature() {
        let h1 = gaussian2(0.6, [0.2, 0.1]);
        let h2 = gaussian2(0.9, [-0.3, 0.4]);
        let tc = twisted_convolution(&h1, &h2, 0.8).unwrap();
        let x = Complex64::new(0.7, -0.5);
        let direct = tc.eval(x).unwrap();
        let cub = Cubature::default()
            .twisted_adaptive(|z| h1.eval(&[z.re, z.im]), |z| h2.eval(&[z.re, z.im]), [-12.0, -12.0], [12.0, 12.0], 0.8, x, 1e-11)
            .unwrap();
        assert!((direct - cub).norm() < 1e-9);
    }

    #[test]
    fn sup_norm_bounded_by_l2_norms() {
        let h1 = gaussian2(0.5, [0.0, 0.0]);
        let h2 = TestFunction::bspline(3, 0.6).tensor(&TestFunction::bspline(2, 0.9));
        let l2 = |h: &TestFunction| h.autocorrelation().eval(&[0.0, 0.0]).re.sqrt();
        let bound = l2(&h1) * l2(&h2);
        let tc = twisted_convolution(&h1, &h2, 1.3).unwrap();
        for i in 0..20 {
            let x = Complex64::new(-2.0 + 0.2 * i as f64, 0.1 * i as f64 - 1.0);
            assert!(tc.eval(x).unwrap().norm() <= bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn alternative_convention_matches_definition() {
        let h1 = gaussian2(0.6, [0.5, 0.0]);
        let h2 = gaussian2(0.8, [0.0, -0.3]);
        let lambda = 0.6;
        let x = Complex64::new(0.3, 0.9);
        let alt = twisted_convolution_alt(&h1, &h2, lambda).unwrap().eval(x).unwrap();
        let direct = Cubature { panels: 24, nodes: 16 }.integrate(
            |u, v| {
                let w = Complex64::new(u, v);
                h1.eval(&[u, v]) * h2.eval(&[x.re - u, x.im - v]) * Complex64::from_polar(1.0, 2.0 * PI * lambda * (w.conj() * x).im)
            },
            [-10.0, -10.0],
            [10.0, 10.0],
        );
        assert!((alt - direct).norm() < 1e-10);
    }

    #[test]
    fn partial_transform_closed_forms() {
        let g = gaussian2(0.7, [0.1, 0.0]);
        let r = g.tensor(&TestFunction::tent());
        let r0 = partial_central_transform(&r, 0.0).unwrap();
        let r1 = partial_central_transform(&r, 1.0).unwrap();
        let q = [0.3, -0.4];
        assert!((r0.eval(&q) - g.eval(&q)).norm() < 1e-14);
        assert!(r1.eval(&q).norm() < 1e-14);

        let r = g.tensor(&TestFunction::gaussian(0.6).translated(&[0.25]));
        let rh = partial_central_transform(&r, 0.5).unwrap().eval(&q);
        let quad: Complex64 = adaptive(
            |t| r.eval(&[q[0], q[1], t]) * Complex64::from_polar(1.0, -2.0 * PI * 0.5 * t),
            -10.0,
            10.0,
            1e-13,
        )
        .unwrap();
        assert!((rh - quad).norm() < 1e-9);
    }

    #[test]
    fn window_indicator() {
        let w = Window::Box { lo: vec![-1.0, 0.0, 0.5], hi: vec![1.0, 2.0, 1.0] };
        let f = window_test_function(&w).unwrap();
        assert_eq!(f.eval(&[0.0, 1.0, 0.7]).re, 1.0);
        assert_eq!(f.eval(&[0.0, 1.0, 1.7]).re, 0.0);
        assert!((f.integral().re - w.volume()).abs() < 1e-14);
    }
}
