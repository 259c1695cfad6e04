//! Compactly supported test functions with closed-form Fourier transforms.
//!
//! A [`TestFunction`] is a finite linear combination of tensor products of
//! one-dimensional factors, and each factor is a translate of a convolution of
//! box indicators and Gaussians. This family is closed under convolution,
//! involution, dilation and translation, and all of these act on the
//! parameters without any quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::{gauss_legendre, sinc};

/// Gaussians are treated as supported in `[−12σ, 12σ]`.
pub const GAUSSIAN_TRUNCATION: f64 = 12.0;

/// A symmetric one-dimensional building block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel1D {
    /// Indicator of `[−half_width, half_width]`.
    Box { half_width: f64 },
    /// `exp(−x²/2σ²)`, peak value 1.
    Gaussian { sigma: f64 },
}

impl Kernel1D {
    fn fourier_transform(&self, xi: f64) -> f64 {
        match *self {
            Kernel1D::Box { half_width: a } => 2.0 * a * sinc(2.0 * PI * a * xi),
            Kernel1D::Gaussian { sigma } => sigma * (2.0 * PI).sqrt() * (-2.0 * PI * PI * sigma * sigma * xi * xi).exp(),
        }
    }

    fn dilated(&self, s: f64) -> Self {
        match *self {
            Kernel1D::Box { half_width } => Kernel1D::Box { half_width: half_width * s },
            Kernel1D::Gaussian { sigma } => Kernel1D::Gaussian { sigma: sigma * s },
        }
    }
}

/// `x ↦ (k₁ ∗ ⋯ ∗ k_j)(x − shift)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor1D {
    pub kernels: Vec<Kernel1D>,
    pub shift: f64,
}

impl Factor1D {
    pub fn new(kernels: Vec<Kernel1D>) -> Self {
        assert!(!kernels.is_empty(), "a factor needs at least one kernel");
        Self { kernels, shift: 0.0 }
    }

    fn split(&self) -> (Vec<f64>, f64, f64) {
        // box half-widths, combined Gaussian σ, and the Gaussian prefactor
        let mut boxes = Vec::new();
        let mut s2 = 0.0;
        let mut prefactor = 1.0;
        let mut n_gauss = 0;
        for k in &self.kernels {
            match *k {
                Kernel1D::Box { half_width } => boxes.push(half_width),
                Kernel1D::Gaussian { sigma } => {
                    s2 += sigma * sigma;
                    prefactor *= sigma * (2.0 * PI).sqrt();
                    n_gauss += 1;
                }
            }
        }
        if n_gauss > 0 {
            let s = s2.sqrt();
            prefactor /= s * (2.0 * PI).sqrt();
            (boxes, s, prefactor)
        } else {
            (boxes, 0.0, 1.0)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.shift;
        let (boxes, s, pre) = self.split();
        if s == 0.0 {
            return box_convolution(&boxes, t);
        }
        let gauss = |u: f64| pre * (-u * u / (2.0 * s * s)).exp();
        if boxes.is_empty() {
            return gauss(t);
        }
        // (B ∗ G)(t) = ∫ B(y) G(t − y) dy over the pieces of B
        let total: f64 = boxes.iter().sum();
        let reach = GAUSSIAN_TRUNCATION * s;
        let lo = (-total).max(t - reach);
        let hi = total.min(t + reach);
        if lo >= hi {
            return 0.0;
        }
        let mut breaks = breakpoints(&boxes);
        breaks.retain(|b| *b > lo && *b < hi);
        breaks.insert(0, lo);
        breaks.push(hi);
        let rule = gauss_legendre(16);
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            let pieces = ((w[1] - w[0]) / s).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let mid = w[0] + h * (p as f64 + 0.5);
                for (node, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let y = mid + 0.5 * h * node;
                    acc += 0.5 * h * wt * box_convolution(&boxes, y) * gauss(t - y);
                }
            }
        }
        acc
    }

    pub fn fourier_transform(&self, xi: f64) -> Complex64 {
        let mag: f64 = self.kernels.iter().map(|k| k.fourier_transform(xi)).product();
        Complex64::from_polar(1.0, -2.0 * PI * xi * self.shift) * mag
    }

    /// Half-width of the (truncated) support around `shift`.
    pub fn support_half_width(&self) -> f64 {
        let (boxes, s, _) = self.split();
        boxes.iter().sum::<f64>() + GAUSSIAN_TRUNCATION * s
    }

    /// Half-width beyond which `|factor| / sup|factor|` is below `tol` for the
    /// Gaussian part.
    pub fn effective_half_width(&self, tol: f64) -> f64 {
        let (boxes, s, _) = self.split();
        let g = if s > 0.0 { s * (2.0 * (1.0 / tol).ln()).sqrt() } else { 0.0 };
        boxes.iter().sum::<f64>() + g.min(GAUSSIAN_TRUNCATION * s)
    }

    /// Interior points where the factor is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (boxes, s, _) = self.split();
        if s > 0.0 || boxes.is_empty() {
            return vec![self.shift];
        }
        breakpoints(&boxes).into_iter().map(|b| b + self.shift).collect()
    }

    fn convolve(&self, other: &Factor1D) -> Factor1D {
        Factor1D {
            kernels: self.kernels.iter().chain(&other.kernels).copied().collect(),
            shift: self.shift + other.shift,
        }
    }
}

fn breakpoints(boxes: &[f64]) -> Vec<f64> {
    let mut pts = vec![0.0f64];
    for &a in boxes {
        pts = pts.iter().flat_map(|p| [p - a, p + a]).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    }
    pts
}

/// `(χ_{[−a₁,a₁]} ∗ ⋯ ∗ χ_{[−a_k,a_k]})(x)` by the truncated-power formula.
fn box_convolution(half_widths: &[f64], x: f64) -> f64 {
    let k = half_widths.len();
    if k == 1 {
        return if x.abs() <= half_widths[0] { 1.0 } else { 0.0 };
    }
    let total: f64 = half_widths.iter().sum();
    if x.abs() >= total {
        return 0.0;
    }
    let mut fact = 1.0;
    for i in 1..k {
        fact *= i as f64;
    }
    let mut acc = 0.0;
    for mask in 0u32..(1 << k) {
        let mut shift = 0.0;
        let mut sign = 1.0;
        for (i, a) in half_widths.iter().enumerate() {
            if mask & (1 << i) != 0 {
                shift -= a;
                sign = -sign;
            } else {
                shift += a;
            }
        }
        let u = x + shift;
        if u > 0.0 {
            acc += sign * u.powi(k as i32 - 1);
        }
    }
    (acc / fact).max(0.0)
}

/// `c · Π_d F_d(x_d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub factors: Vec<Factor1D>,
}

impl Term {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut v = self.coeff;
        for (f, xi) in self.factors.iter().zip(x) {
            if v == Complex64::new(0.0, 0.0) {
                break;
            }
            v *= f.eval(*xi);
        }
        v
    }

    pub fn fourier_transform(&self, xi: &[f64]) -> Complex64 {
        let mut v = self.coeff;
        for (f, x) in self.factors.iter().zip(xi) {
            v *= f.fourier_transform(*x);
        }
        v
    }
}

/// A finite linear combination of tensor-product terms on ℝᵈ.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    dim: usize,
    terms: Vec<Term>,
}

impl TestFunction {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn from_terms(dim: usize, terms: Vec<Term>) -> Self {
        assert!(terms.iter().all(|t| t.factors.len() == dim), "term dimension mismatch");
        Self { dim, terms }
    }

    /// One-dimensional function from a single factor.
    pub fn from_factor(factor: Factor1D, coeff: f64) -> Self {
        Self { dim: 1, terms: vec![Term { coeff: Complex64::new(coeff, 0.0), factors: vec![factor] }] }
    }

    /// Indicator of `[−a, a]`.
    pub fn box_indicator(half_width: f64) -> Self {
        Self::from_factor(Factor1D::new(vec![Kernel1D::Box { half_width }]), 1.0)
    }

    /// Centred B-spline of order `k` and step `h`: the `k`-fold convolution of
    /// `h⁻¹χ_{[−h/2, h/2]}`. Support `[−kh/2, kh/2]`, unit integral.
    pub fn bspline(order: usize, h: f64) -> Self {
        assert!(order >= 1);
        Self::from_factor(Factor1D::new(vec![Kernel1D::Box { half_width: h / 2.0 }; order]), h.powi(-(order as i32)))
    }

    /// The tent `max(0, 1 − |x|)`.
    pub fn tent() -> Self {
        Self::bspline(2, 1.0)
    }

    /// `exp(−x²/2σ²)`.
    pub fn gaussian(sigma: f64) -> Self {
        Self::from_factor(Factor1D::new(vec![Kernel1D::Gaussian { sigma }]), 1.0)
    }

    /// `exp(−|x|²/2σ²)` on ℝᵈ.
    pub fn isotropic_gaussian(dim: usize, sigma: f64) -> Self {
        Self::tensor_all(&vec![Self::gaussian(sigma); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// `∫ f(x) e^{−2πi⟨ξ,x⟩} dx`.
    pub fn fourier_transform(&self, xi: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.fourier_transform(xi)).sum()
    }

    pub fn integral(&self) -> Complex64 {
        self.fourier_transform(&vec![0.0; self.dim])
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|t| Term { coeff: t.coeff * c, factors: t.factors.clone() }).collect(),
        }
    }

    pub fn scaled_real(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }

    pub fn add(&self, other: &TestFunction) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, terms: self.terms.iter().chain(&other.terms).cloned().collect() }
    }

    /// `(f ⊗ g)(x, y) = f(x) g(y)`.
    pub fn tensor(&self, other: &TestFunction) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    factors: a.factors.iter().chain(&b.factors).cloned().collect(),
                });
            }
        }
        Self { dim: self.dim + other.dim, terms }
    }

    pub fn tensor_all(parts: &[TestFunction]) -> Self {
        let mut it = parts.iter();
        let first = it.next().expect("at least one factor").clone();
        it.fold(first, |acc, p| acc.tensor(p))
    }

    /// `f ∗ g`.
    pub fn convolve(&self, other: &TestFunction) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    factors: a.factors.iter().zip(&b.factors).map(|(x, y)| x.convolve(y)).collect(),
                });
            }
        }
        Self { dim: self.dim, terms }
    }

    /// `f*(x) = conj f(−x)`.
    pub fn involution(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.conj(),
                    factors: t.factors.iter().map(|f| Factor1D { kernels: f.kernels.clone(), shift: -f.shift }).collect(),
                })
                .collect(),
        }
    }

    /// `f* ∗ f`, whose Fourier transform is `|f̂|²`.
    pub fn autocorrelation(&self) -> Self {
        self.involution().convolve(self)
    }

    /// `x ↦ f(x / s)` for `s > 0`.
    pub fn dilated(&self, s: f64) -> Self {
        assert!(s > 0.0);
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mut coeff = t.coeff;
                    let factors = t
                        .factors
                        .iter()
                        .map(|f| {
                            coeff *= s.powi(1 - f.kernels.len() as i32);
                            Factor1D { kernels: f.kernels.iter().map(|k| k.dilated(s)).collect(), shift: f.shift * s }
                        })
                        .collect();
                    Term { coeff, factors }
                })
                .collect(),
        }
    }

    /// `x ↦ f(x − v)`.
    pub fn translated(&self, v: &[f64]) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    factors: t
                        .factors
                        .iter()
                        .zip(v)
                        .map(|(f, s)| Factor1D { kernels: f.kernels.clone(), shift: f.shift + s })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Axis box containing the support.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.support_box_with(|f| f.support_half_width())
    }

    /// Axis box outside which Gaussian parts have decayed below `tol`.
    pub fn effective_support_box(&self, tol: f64) -> (Vec<f64>, Vec<f64>) {
        self.support_box_with(|f| f.effective_half_width(tol))
    }

    fn support_box_with(&self, width: impl Fn(&Factor1D) -> f64) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for t in &self.terms {
            if t.coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (d, f) in t.factors.iter().enumerate() {
                let w = width(f);
                lo[d] = lo[d].min(f.shift - w);
                hi[d] = hi[d].max(f.shift + w);
            }
        }
        if lo.iter().any(|v| v.is_infinite()) {
            return (vec![0.0; self.dim], vec![0.0; self.dim]);
        }
        (lo, hi)
    }

    /// Euclidean radius of the smallest origin-centred ball containing the support.
    pub fn support_radius(&self) -> f64 {
        radius_of_box(&self.support_box())
    }

    pub fn effective_support_radius(&self, tol: f64) -> f64 {
        radius_of_box(&self.effective_support_box(tol))
    }

    /// The one-dimensional factors of term `t` along axis `d`.
    pub(crate) fn factor(&self, t: usize, d: usize) -> &Factor1D {
        &self.terms[t].factors[d]
    }
}

fn radius_of_box((lo, hi): &(Vec<f64>, Vec<f64>)) -> f64 {
    lo.iter().zip(hi).map(|(l, h)| l.abs().max(h.abs()).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive;

    #[test]
    fn tent_values_and_transform() {
        let t = TestFunction::tent();
        for (x, v) in [(0.0, 1.0), (0.5, 0.5), (-0.25, 0.75), (1.0, 0.0), (1.5, 0.0)] {
            assert!((t.eval(&[x]).re - v).abs() < 1e-15, "tent({x})");
        }
        assert!((t.fourier_transform(&[0.0]).re - 1.0).abs() < 1e-15);
        assert!(t.fourier_transform(&[1.0]).norm() < 1e-15);
    }

    #[test]
    fn box_transform_reference() {
        let b = TestFunction::box_indicator(1.0);
        let xi = -std::f64::consts::SQRT_2 / 4.0;
        let v = b.fourier_transform(&[xi]);
        assert!((v.re - (2.0 * PI * xi).sin() / (PI * xi)).abs() < 1e-15);
        // midpoint-rule cross-check with 10⁶ points
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        let q: f64 = (0..n).map(|k| (2.0 * PI * xi * (-1.0 + h * (k as f64 + 0.5))).cos() * h).sum();
        assert!((q - v.re).abs() < 1e-9);
    }

    #[test]
    fn tent_autocorrelation_values() {
        let a = TestFunction::tent().autocorrelation();
        assert!((a.eval(&[0.0]).re - 2.0 / 3.0).abs() < 1e-14);
        assert!((a.eval(&[1.0]).re - 1.0 / 6.0).abs() < 1e-14);
        assert!(a.eval(&[2.0]).norm() < 1e-14);
    }

    #[test]
    fn mixed_kernels_match_quadrature() {
        let f = TestFunction::box_indicator(0.7).convolve(&TestFunction::gaussian(0.3));
        for x in [0.0, 0.5, 0.9, 1.4] {
            let q = adaptive(|y: f64| if y.abs() <= 0.7 { (-(x - y) * (x - y) / (2.0 * 0.09)).exp() } else { 0.0 }, -0.7, 0.7, 1e-13)
                .unwrap();
            assert!((f.eval(&[x]).re - q).abs() < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn gaussian_convolution_closed_form() {
        let g = TestFunction::gaussian(0.5).autocorrelation();
        // ∫ e^{−y²/2σ²} e^{−(x−y)²/2σ²} dy = σ√π e^{−x²/4σ²}
        let x: f64 = 0.8;
        let expect = 0.5 * PI.sqrt() * (-x * x / (4.0 * 0.25)).exp();
        assert!((g.eval(&[x]).re - expect).abs() < 1e-14);
    }

    #[test]
    fn dilation_and_translation() {
        let t = TestFunction::tent();
        let d = t.dilated(2.0);
        assert!((d.eval(&[1.0]).re - 0.5).abs() < 1e-15);
        assert!((d.integral().re - 2.0).abs() < 1e-14);
        let s = t.translated(&[3.0]);
        assert!((s.eval(&[3.5]).re - 0.5).abs() < 1e-15);
        let sb = s.support_box();
        assert_eq!(sb, (vec![2.0], vec![4.0]));
    }

    #[test]
    fn integral_matches_quadrature() {
        let f = TestFunction::bspline(3, 0.8).translated(&[0.3]).add(&TestFunction::gaussian(0.4).scaled_real(2.0));
        let q = adaptive(|x: f64| f.eval(&[x]).re, -6.0, 6.0, 1e-13).unwrap();
        assert!((f.integral().re - q).abs() <= 1e-10 * q.abs());
    }
}
