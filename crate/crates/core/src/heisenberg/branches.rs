//! Diffraction coefficients of Heisenberg model sets, one function per branch
//! of the spherical spectrum.
//!
//! Dual points of `Δ` are `η = (u/2 + v√2/4, u/2 − v√2/4)` with
//! `u, v ∈ ℤ[i]` (componentwise in real and imaginary parts), and dual points
//! of `Ξ` are `(k/2 + l√2/4, k/2 − l√2/4)` with `k, l ∈ ℤ`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::test_function::Factor1D;
use crate::harmonic::TestFunction;
use crate::quadrature::{adaptive_piecewise, gauss_hermite};
use crate::scheme::Window;

use super::laguerre::LaguerreSpherical;
use super::twisted::{partial_central_transform, twisted_convolution, window_test_function};
use super::{GaussInt, HScheme};

const LABEL_SEARCH: i64 = 2000;
const LABEL_TOL: f64 = 1e-9;
const MAX_DEGREE: usize = 40;

/// Solves `x = u/2 + v√2/4` for integers with the smallest `|v|`.
fn split_quadratic(x: f64) -> Option<(i64, i64)> {
    for r in 0..=LABEL_SEARCH {
        for v in if r == 0 { vec![0] } else { vec![r, -r] } {
            let u = (2.0 * (x - v as f64 * SQRT_2 / 4.0)).round();
            if (u / 2.0 + v as f64 * SQRT_2 / 4.0 - x).abs() <= LABEL_TOL {
                return Some((u as i64, v));
            }
        }
    }
    None
}

/// A point of `Δ^⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DeltaDual {
    pub u: (i64, i64),
    pub v: (i64, i64),
}

impl DeltaDual {
    pub fn new(u: GaussInt, v: GaussInt) -> Self {
        Self { u: (u.re, u.im), v: (v.re, v.im) }
    }

    /// The dual point whose first component is `η₁`.
    pub fn from_first(eta1: Complex64) -> Result<Self> {
        let miss = || Error::LabelNotInSpectrum(format!("{eta1} is not the first component of a dual point of Δ"));
        let (ur, vr) = split_quadratic(eta1.re).ok_or_else(miss)?;
        let (ui, vi) = split_quadratic(eta1.im).ok_or_else(miss)?;
        Ok(Self { u: (ur, ui), v: (vr, vi) })
    }

    pub fn first(&self) -> Complex64 {
        let f = |u: i64, v: i64| u as f64 / 2.0 + v as f64 * SQRT_2 / 4.0;
        Complex64::new(f(self.u.0, self.v.0), f(self.u.1, self.v.1))
    }

    pub fn second(&self) -> Complex64 {
        let f = |u: i64, v: i64| u as f64 / 2.0 - v as f64 * SQRT_2 / 4.0;
        Complex64::new(f(self.u.0, self.v.0), f(self.u.1, self.v.1))
    }

    /// `8|η₁|² = N + 2√2 B` with `N = 2|u|² + |v|²` and `B = u·v`; equal
    /// invariants is the same as lying on the same U(1)-orbit.
    pub fn invariants(&self) -> (i64, i64) {
        let (u, v) = (self.u, self.v);
        (2 * (u.0 * u.0 + u.1 * u.1) + v.0 * v.0 + v.1 * v.1, u.0 * v.0 + u.1 * v.1)
    }

    /// All dual points whose first component has the same modulus.
    pub fn orbit(&self) -> Vec<DeltaDual> {
        let (n, b) = self.invariants();
        let mut out = Vec::new();
        let umax = ((n / 2) as f64).sqrt().floor() as i64 + 1;
        for u0 in -umax..=umax {
            for u1 in -umax..=umax {
                let rest = n - 2 * (u0 * u0 + u1 * u1);
                if rest < 0 {
                    continue;
                }
                let vmax = (rest as f64).sqrt().floor() as i64 + 1;
                for v0 in -vmax..=vmax {
                    let r = rest - v0 * v0;
                    if r < 0 {
                        continue;
                    }
                    let s = (r as f64).sqrt().round() as i64;
                    if s * s != r {
                        continue;
                    }
                    for v1 in if s == 0 { vec![0] } else { vec![s, -s] } {
                        if u0 * v0 + u1 * v1 == b {
                            out.push(DeltaDual { u: (u0, u1), v: (v0, v1) });
                        }
                    }
                }
            }
        }
        out.sort_by_key(|d| (d.u, d.v));
        out
    }
}

/// A point of `Ξ^⊥`: central frequencies `λ₁ = k/2 + l√2/4`, `λ₂ = k/2 − l√2/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct XiDual {
    pub k: i64,
    pub l: i64,
}

impl XiDual {
    pub fn from_first(lambda1: f64) -> Result<Self> {
        let (k, l) = split_quadratic(lambda1)
            .ok_or_else(|| Error::LabelNotInSpectrum(format!("λ₁ = {lambda1} is not a projection of a dual point of Ξ")))?;
        Ok(Self { k, l })
    }

    pub fn lambda1(&self) -> f64 {
        self.k as f64 / 2.0 + self.l as f64 * SQRT_2 / 4.0
    }

    pub fn lambda2(&self) -> f64 {
        self.k as f64 / 2.0 - self.l as f64 * SQRT_2 / 4.0
    }
}

fn centrally_integrated(window: &Window, lambda: f64) -> Result<TestFunction> {
    if window.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: window.dim() });
    }
    partial_central_transform(&window_test_function(window)?, lambda)
}

/// Coefficient on a Bessel-type spherical function.
#[derive(Clone, Debug, Serialize)]
pub struct BesselCoefficient {
    pub label: DeltaDual,
    pub members: Vec<DeltaDual>,
    /// `Σ |FT((χ_W)₁)(η₂)|²` over the orbit.
    pub orbit_sum: f64,
    /// `orbit_sum / covol(Γ)²`.
    pub intensity: f64,
}

pub fn bessel_branch_coefficient(hscheme: &HScheme, window: &Window, eta1: Complex64) -> Result<BesselCoefficient> {
    let label = DeltaDual::from_first(eta1)?;
    bessel_branch_coefficient_at(hscheme, window, label)
}

pub fn bessel_branch_coefficient_at(hscheme: &HScheme, window: &Window, label: DeltaDual) -> Result<BesselCoefficient> {
    let r1 = centrally_integrated(window, 0.0)?;
    let members = label.orbit();
    let orbit_sum = members
        .iter()
        .map(|d| {
            let e = d.second();
            r1.fourier_transform(&[e.re, e.im]).norm_sqr()
        })
        .sum::<f64>();
    Ok(BesselCoefficient { label, members, orbit_sum, intensity: orbit_sum / hscheme.covolume().powi(2) })
}

/// Settings for the variational nilpotent coefficient.
#[derive(Clone, Debug)]
pub struct NilpotentOptions {
    pub ansatz_dim: usize,
    /// Lattice terms are dropped once both factors fall below this.
    pub truncation: f64,
    pub hermite_nodes: usize,
}

impl NilpotentOptions {
    pub fn new(ansatz_dim: usize) -> Self {
        Self { ansatz_dim, truncation: 1e-16, hermite_nodes: 48 }
    }
}

/// Lower bound for the coefficient on `ω_o ⊗ χ₁`, maximized over the span of
/// the first `ansatz_dim` Hermite–Gaussian functions.
#[derive(Clone, Debug, Serialize)]
pub struct NilpotentCoefficient {
    pub label: XiDual,
    pub lambda1: f64,
    pub lambda2: f64,
    pub m: u32,
    pub ansatz_dim: usize,
    /// `v†M⁻¹v / ‖ω_o‖²`, a lower bound for the supremum.
    pub lower_bound: f64,
    /// `lower_bound / (covol(Ξ) · covol(Γ))`.
    pub intensity: f64,
    /// Lower bounds for the leading sub-spans of dimension `1..=ansatz_dim`.
    pub by_dimension: Vec<f64>,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub lattice_terms: usize,
    #[serde(skip)]
    pub v: DVector<Complex64>,
    #[serde(skip)]
    pub gram: DMatrix<Complex64>,
}

/// Hermite–Gaussian index pairs ordered by total degree.
pub fn hermite_indices(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim);
    let mut n = 0;
    while out.len() < dim {
        for a in 0..=n {
            if out.len() < dim {
                out.push((a, n - a));
            }
        }
        n += 1;
    }
    out
}

/// Orthonormal Hermite polynomial parts `p_n(y)` with `h_n(y) = p_n(y)e^{−y²/2}`.
fn hermite_polys(nmax: usize, y: f64, out: &mut [f64]) {
    out[0] = PI.powf(-0.25);
    if nmax >= 1 {
        out[1] = SQRT_2 * y * out[0];
    }
    for n in 1..nmax {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// One-dimensional Hermite functions `φ_n(y) = √α h_n(αy)`, `n ≤ nmax`.
#[derive(Clone, Copy, Debug)]
struct HermiteBasis {
    alpha: f64,
    nmax: usize,
}

impl HermiteBasis {
    fn eval_all(&self, y: f64, out: &mut [f64]) {
        let t = self.alpha * y;
        hermite_polys(self.nmax, t, out);
        let g = self.alpha.sqrt() * (-0.5 * t * t).exp();
        out.iter_mut().for_each(|v| *v *= g);
    }

    /// `I[a][b] = ∫ φ_a(x − u) φ_b(u) e^{2πiωu} du` by Gauss–Hermite about
    /// the midpoint.
    fn pair_integrals(&self, x: f64, omega: f64, nodes: usize) -> Vec<Vec<Complex64>> {
        let rule = gauss_hermite(nodes);
        let a = self.alpha;
        let n = self.nmax + 1;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        let mut pa = vec![0.0; n];
        let mut pb = vec![0.0; n];
        let pre = (-0.25 * a * a * x * x).exp();
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            hermite_polys(self.nmax, 0.5 * a * x - t, &mut pa);
            hermite_polys(self.nmax, 0.5 * a * x + t, &mut pb);
            let u = 0.5 * x + t / a;
            let ph = Complex64::from_polar(w * pre, 2.0 * PI * omega * u);
            for i in 0..n {
                for j in 0..n {
                    out[i][j] += ph * (pa[i] * pb[j]);
                }
            }
        }
        out
    }

    /// `J[a] = ∫ φ_a(x − u) F(u) e^{2πiωu} du` for a piecewise smooth factor.
    fn factor_integrals(&self, factor: &Factor1D, x: f64, omega: f64) -> Result<Vec<Complex64>> {
        let w = factor.support_half_width();
        let reach = (80.0f64.sqrt() + (2.0 * self.nmax as f64 + 1.0).sqrt()) / self.alpha;
        let lo = (factor.shift - w).max(x - reach);
        let hi = (factor.shift + w).min(x + reach);
        let n = self.nmax + 1;
        if !(hi > lo) {
            return Ok(vec![Complex64::new(0.0, 0.0); n]);
        }
        let mut breaks = vec![lo, hi];
        breaks.extend(factor.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
        breaks.sort_by(f64::total_cmp);
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let v: Complex64 = adaptive_piecewise(
                |u| {
                    let mut b = [0.0; MAX_DEGREE + 1];
                    self.eval_all(x - u, &mut b[..n]);
                    Complex64::from_polar(b[k] * factor.eval(u), 2.0 * PI * omega * u)
                },
                &breaks,
                1e-14,
            )?;
            out.push(v);
        }
        Ok(out)
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Points `(δ₁, δ₂)` of `Δ` with `|δ₁| ≤ r1` and `δ₂` in the given box.
fn delta_points(r1: f64, lo2: [f64; 2], hi2: [f64; 2]) -> Vec<(Complex64, Complex64)> {
    let axis = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        // one real coordinate: (a + b√2, a − b√2)
        let amin = ((-r1 + lo) / 2.0).floor() as i64 - 1;
        let amax = ((r1 + hi) / 2.0).ceil() as i64 + 1;
        let bmax = ((r1 + lo.abs().max(hi.abs())) / (2.0 * SQRT_2)).ceil() as i64 + 1;
        let mut out = Vec::new();
        for a in amin..=amax {
            for b in -bmax..=bmax {
                let (d1, d2) = (a as f64 + b as f64 * SQRT_2, a as f64 - b as f64 * SQRT_2);
                if d1.abs() <= r1 && d2 >= lo && d2 <= hi {
                    out.push((d1, d2));
                }
            }
        }
        out
    };
    let re = axis(lo2[0], hi2[0]);
    let im = axis(lo2[1], hi2[1]);
    let mut out = Vec::new();
    for &(x1, x2) in &re {
        for &(y1, y2) in &im {
            if x1 * x1 + y1 * y1 <= r1 * r1 {
                out.push((Complex64::new(x1, y1), Complex64::new(x2, y2)));
            }
        }
    }
    out
}

/// Radius beyond which `|ω_o| ≤ tol`, from the decay envelope.
fn omega_radius(omega: &LaguerreSpherical, tol: f64) -> f64 {
    let edc = omega.edc_check(1.0, 1);
    let bound = |r: f64| {
        let s = r * r;
        edc.envelope.iter().rev().fold(0.0, |a, e| a * s + e) * (-edc.c * s).exp()
    };
    let mut r = 1.0;
    while bound(r) > tol || bound(1.5 * r) > tol {
        r *= 1.1;
    }
    r
}

pub fn nilpotent_branch_coefficient(
    hscheme: &HScheme,
    window: &Window,
    lambda1: f64,
    m: u32,
    ansatz_dim: usize,
) -> Result<NilpotentCoefficient> {
    nilpotent_branch_coefficient_with(hscheme, window, lambda1, m, &NilpotentOptions::new(ansatz_dim))
}

pub fn nilpotent_branch_coefficient_with(
    hscheme: &HScheme,
    window: &Window,
    lambda1: f64,
    m: u32,
    opts: &NilpotentOptions,
) -> Result<NilpotentCoefficient> {
    if opts.ansatz_dim == 0 {
        return Err(Error::InvalidParameter("ansatz dimension must be positive".into()));
    }
    let label = XiDual::from_first(lambda1)?;
    if label.k == 0 && label.l == 0 {
        return Err(Error::TrivialCharacter);
    }
    let (l1, l2) = (label.lambda1(), label.lambda2());
    let omega = LaguerreSpherical::new(l1, m)?;
    let r = centrally_integrated(window, l2)?;
    let idx = hermite_indices(opts.ansatz_dim);
    let nmax = idx.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    if nmax > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!("ansatz dimension {} is too large", opts.ansatz_dim)));
    }
    let basis = HermiteBasis { alpha: (2.0 * PI * l2.abs()).sqrt(), nmax };
    let r1 = omega_radius(&omega, opts.truncation);
    let reach = (4.0 * opts.truncation.recip().ln()).sqrt() / basis.alpha + 2.0 * (2.0 * nmax as f64 + 1.0).sqrt() / basis.alpha;
    let (mut lo2, mut hi2) = ([-reach, -reach], [reach, reach]);
    if !r.is_zero() {
        let (wl, wh) = r.support_box();
        for d in 0..2 {
            lo2[d] = lo2[d].min(wl[d] - reach);
            hi2[d] = hi2[d].max(wh[d] + reach);
        }
    }
    let points = delta_points(r1, lo2, hi2);
    let dim = idx.len();

    let (v, gram) = points
        .par_iter()
        .map(|&(d1, d2)| -> Result<(DVector<Complex64>, DMatrix<Complex64>)> {
            let w = omega.eval(d1);
            let mut v = DVector::zeros(dim);
            let mut g = DMatrix::zeros(dim, dim);
            // φ_j* = (−1)^{a+b} φ_j; the phase splits as e^{2πiλ(u x_im − v x_re)}
            let pre = basis.pair_integrals(d2.re, l2 * d2.im, opts.hermite_nodes);
            let pim = basis.pair_integrals(d2.im, -l2 * d2.re, opts.hermite_nodes);
            for (j, &(aj, bj)) in idx.iter().enumerate() {
                let s = sign(aj + bj) * w;
                for (k, &(ak, bk)) in idx.iter().enumerate() {
                    g[(j, k)] = pre[aj][ak] * pim[bj][bk] * s;
                }
            }
            for t in r.terms() {
                let fre = basis.factor_integrals(&t.factors[0], d2.re, l2 * d2.im)?;
                if fre.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                let fim = basis.factor_integrals(&t.factors[1], d2.im, -l2 * d2.re)?;
                for (j, &(aj, bj)) in idx.iter().enumerate() {
                    v[j] += t.coeff * fre[aj] * fim[bj] * (sign(aj + bj) * w);
                }
            }
            Ok((v, g))
        })
        .try_reduce(
            || (DVector::zeros(dim), DMatrix::zeros(dim, dim)),
            |a, b| Ok((a.0 + b.0, a.1 + b.1)),
        )?;

    let hermiticity_residual = (&gram - gram.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let herm = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eigenvalue = herm.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -1e-8 {
        return Err(Error::AnsatzDegenerate { min_eigenvalue });
    }
    let chol = Cholesky::new(herm).ok_or(Error::AnsatzDegenerate { min_eigenvalue })?;
    // v†M⁻¹v = ‖L⁻¹v‖², and the leading entries of L⁻¹v solve the leading blocks
    let y = chol.l().solve_lower_triangular(&v).ok_or(Error::AnsatzDegenerate { min_eigenvalue })?;
    let norm = omega.norm_sq();
    let mut acc = 0.0;
    let by_dimension: Vec<f64> = y
        .iter()
        .map(|z| {
            acc += z.norm_sqr();
            acc / norm
        })
        .collect();
    let lower_bound = *by_dimension.last().expect("dim ≥ 1");
    Ok(NilpotentCoefficient {
        label,
        lambda1: l1,
        lambda2: l2,
        m,
        ansatz_dim: dim,
        lower_bound,
        intensity: lower_bound / (hscheme.xi_covolume() * hscheme.covolume()),
        by_dimension,
        hermiticity_residual,
        min_eigenvalue,
        lattice_terms: points.len(),
        v,
        gram,
    })
}

/// The constrained objective for a single function `ψ`, rescaled to satisfy
/// the normalization, evaluated with the general twisted convolution.
pub fn nilpotent_constrained_value(window: &Window, lambda1: f64, m: u32, psi: &TestFunction, radius: f64) -> Result<f64> {
    let label = XiDual::from_first(lambda1)?;
    let (l1, l2) = (label.lambda1(), label.lambda2());
    let omega = LaguerreSpherical::new(l1, m)?;
    let r = centrally_integrated(window, l2)?;
    let psi_star = psi.involution();
    let to_r = twisted_convolution(&psi_star, &r, l2)?;
    let to_psi = twisted_convolution(&psi_star, psi, l2)?;
    let r1 = omega_radius(&omega, 1e-16);
    let points = delta_points(r1, [-radius, -radius], [radius, radius]);
    let (a, b) = points
        .par_iter()
        .map(|&(d1, d2)| -> Result<(Complex64, Complex64)> {
            let w = omega.eval(d1);
            Ok((to_r.eval(d2)? * w, to_psi.eval(d2)? * w))
        })
        .try_reduce(|| (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
    if !(b.re > 0.0) {
        return Err(Error::AnsatzDegenerate { min_eigenvalue: b.re });
    }
    // ψ ↦ tψ with |t|² b = 1/‖ω‖²
    Ok(a.norm_sqr() / (omega.norm_sq() * b.re))
}
