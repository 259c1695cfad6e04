//! Test functions, finite point groups, Bessel-type spherical functions and
//! weighted L² norms.

pub mod test_function;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_points, Region};
use crate::quadrature::{adaptive_piecewise, adaptive_with_limit};
use crate::scheme::Scheme;
pub use test_function::{Factor1D, Kernel1D, Term, TestFunction, GAUSSIAN_TRUNCATION};

/// Tolerance for identifying orbit points and group elements.
pub const ORBIT_TOLERANCE: f64 = 1e-9;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// A finite group of orthogonal matrices with its multiplication table.
#[derive(Clone, Debug)]
pub struct PointGroup {
    dim: usize,
    elements: Vec<DMatrix<f64>>,
    table: Vec<Vec<usize>>,
}

impl PointGroup {
    /// Validates closure, identity, inverses and orthogonality.
    pub fn new(elements: Vec<DMatrix<f64>>) -> Result<Self> {
        let dim = elements.first().map(|e| e.nrows()).ok_or_else(|| Error::InvalidPointGroup("no elements".into()))?;
        let id = DMatrix::<f64>::identity(dim, dim);
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::InvalidPointGroup("elements differ in shape".into()));
            }
            if (e.transpose() * e - &id).amax() > 1e-10 {
                return Err(Error::InvalidPointGroup("element is not orthogonal".into()));
            }
        }
        let find = |m: &DMatrix<f64>| elements.iter().position(|e| (e - m).amax() < ORBIT_TOLERANCE);
        if find(&id).is_none() {
            return Err(Error::InvalidPointGroup("identity missing".into()));
        }
        let mut table = vec![vec![0; elements.len()]; elements.len()];
        for (i, a) in elements.iter().enumerate() {
            if find(&a.transpose()).is_none() {
                return Err(Error::InvalidPointGroup("not closed under inverses".into()));
            }
            for (j, b) in elements.iter().enumerate() {
                table[i][j] = find(&(a * b)).ok_or_else(|| Error::InvalidPointGroup("not closed under products".into()))?;
            }
        }
        Ok(Self { dim, elements, table })
    }

    /// The group generated by the given orthogonal matrices.
    pub fn generated_by(generators: &[DMatrix<f64>]) -> Result<Self> {
        let dim = generators.first().map(|g| g.nrows()).ok_or_else(|| Error::InvalidPointGroup("no generators".into()))?;
        let mut elements = vec![DMatrix::<f64>::identity(dim, dim)];
        let mut frontier = elements.clone();
        while let Some(e) = frontier.pop() {
            for g in generators {
                let p = g * &e;
                if !elements.iter().any(|x| (x - &p).amax() < ORBIT_TOLERANCE) {
                    if elements.len() > 10_000 {
                        return Err(Error::InvalidPointGroup("generated group is not finite".into()));
                    }
                    elements.push(p.clone());
                    frontier.push(p);
                }
            }
        }
        Self::new(elements)
    }

    pub fn trivial(dim: usize) -> Self {
        Self::new(vec![DMatrix::identity(dim, dim)]).expect("trivial group")
    }

    /// `{±I}`.
    pub fn sign(dim: usize) -> Self {
        Self::new(vec![DMatrix::identity(dim, dim), -DMatrix::<f64>::identity(dim, dim)]).expect("sign group")
    }

    fn rotation(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    /// Rotations of the plane by multiples of `2π/n`.
    pub fn cyclic(n: usize) -> Self {
        Self::new((0..n).map(|k| Self::rotation(2.0 * PI * k as f64 / n as f64)).collect()).expect("cyclic group")
    }

    /// Symmetries of the regular `n`-gon (order `2n`).
    pub fn dihedral(n: usize) -> Self {
        let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let mut els: Vec<DMatrix<f64>> = (0..n).map(|k| Self::rotation(2.0 * PI * k as f64 / n as f64)).collect();
        let refl: Vec<DMatrix<f64>> = els.iter().map(|r| r * &flip).collect();
        els.extend(refl);
        Self::new(els).expect("dihedral group")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    /// Index of `elements[i] · elements[j]`.
    pub fn product_index(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn apply(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let m = &self.elements[k];
        (0..self.dim).map(|i| (0..self.dim).map(|j| m[(i, j)] * x[j]).sum()).collect()
    }

    /// `{kξ : k ∈ K}`, deduplicated and sorted lexicographically.
    pub fn orbit(&self, xi: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for k in 0..self.order() {
            let p: Vec<f64> = self.apply(k, xi).into_iter().map(clean).collect();
            if !out.iter().any(|q| max_abs_diff(q, &p) < ORBIT_TOLERANCE) {
                out.push(p);
            }
        }
        out.sort_by(|a, b| lex_cmp(a, b));
        out
    }

    /// Lexicographically minimal orbit element.
    pub fn representative(&self, xi: &[f64]) -> Vec<f64> {
        self.orbit(xi).swap_remove(0)
    }

    /// Largest `|f(kx) − f(x)|` over deterministic sample points in the support.
    pub fn invariance_residual(&self, f: &TestFunction, samples: usize) -> f64 {
        let (lo, hi) = f.effective_support_box(1e-16);
        let r = lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let x: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-r..=r)).collect();
            let fx = f.eval(&x);
            for k in 0..self.order() {
                worst = worst.max((f.eval(&self.apply(k, &x)) - fx).norm());
            }
        }
        worst
    }
}

/// Label of a positive-definite spherical function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum SphericalLabel {
    /// `[ξ₁]`, the K-average of the character `e^{2πi⟨ξ₁,·⟩}`; `xi1` is the
    /// lexicographically minimal orbit element.
    Bessel { xi1: Vec<f64> },
    /// Laguerre-type function with central frequency `lambda1 ≠ 0`.
    Nilpotent { lambda1: f64, m: u32 },
}

impl SphericalLabel {
    pub fn bessel(k: &PointGroup, xi: &[f64]) -> Self {
        SphericalLabel::Bessel { xi1: k.representative(xi) }
    }

    pub fn nilpotent(lambda1: f64, m: u32) -> Result<Self> {
        if lambda1 == 0.0 {
            return Err(Error::TrivialCharacter);
        }
        Ok(SphericalLabel::Nilpotent { lambda1, m })
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, SphericalLabel::Bessel { xi1 } if xi1.iter().all(|v| *v == 0.0))
    }
}

/// `(1/|K|) Σ_k e^{2πi⟨kξ₁, x⟩}`.
pub fn bessel_spherical(k: &PointGroup, xi1: &[f64], x: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..k.order() {
        let kx = k.apply(i, xi1);
        let phase: f64 = kx.iter().zip(x).map(|(a, b)| a * b).sum();
        acc += Complex64::from_polar(1.0, 2.0 * PI * phase);
    }
    acc / k.order() as f64
}

/// Spherical transform of a K-invariant test function, evaluated as the
/// orbit average of its Fourier transform.
pub fn spherical_ft(f: &TestFunction, k: &PointGroup, label: &SphericalLabel) -> Result<Complex64> {
    let SphericalLabel::Bessel { xi1 } = label else {
        return Err(Error::InvalidParameter("spherical_ft expects a Bessel label".into()));
    };
    if f.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let residual = k.invariance_residual(f, 64);
    if residual > 1e-8 {
        return Err(Error::NotInvariant { residual });
    }
    Ok(orbit_average_ft(f, k, xi1))
}

pub(crate) fn orbit_average_ft(f: &TestFunction, k: &PointGroup, xi1: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..k.order() {
        acc += f.fourier_transform(&k.apply(i, xi1));
    }
    acc / k.order() as f64
}

/// How distances combine across coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Sum of absolute coordinates. Weighted norms of tensor products
    /// factorize exactly.
    #[default]
    L1,
    Euclidean,
}

impl Metric {
    pub fn norm(&self, x: &[f64]) -> f64 {
        match self {
            Metric::L1 => x.iter().map(|v| v.abs()).sum(),
            Metric::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

/// Weight `α` and metric for `‖f‖²_{2,α} = ∫|f|² e^{α d(x,0)}`, together with
/// the periodization constant `C = (Σ_γ e^{−α d(γ,e)/2})^{1/2}` of a scheme,
/// where `d = d_G + d_H`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNormParams {
    pub alpha: f64,
    pub metric: Metric,
    pub constant: Option<f64>,
    /// Radius at which the lattice sum for `C` was declared converged.
    pub radius: f64,
}

impl WeightedNormParams {
    pub fn new(alpha: f64, metric: Metric) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight α must be positive, got {alpha}")));
        }
        Ok(Self { alpha, metric, constant: None, radius: 0.0 })
    }

    /// Computes `C` for `scheme`, growing the summation radius until the
    /// partial sums change by at most `1e−8`.
    pub fn for_scheme(alpha: f64, metric: Metric, scheme: &Scheme) -> Result<Self> {
        let mut p = Self::new(alpha, metric)?;
        let n = scheme.physical_dim();
        let d = n + scheme.internal_dim();
        let mut radius = 8.0;
        let mut prev = f64::NAN;
        loop {
            let pts = enumerate_points(scheme.lattice(), &Region::cube(d, radius))?;
            let s: f64 = pts
                .iter()
                .map(|q| metric.norm(&q.point[..n]) + metric.norm(&q.point[n..]))
                .filter(|dist| *dist <= radius)
                .map(|dist| (-alpha * dist / 2.0).exp())
                .sum();
            if (s - prev).abs() <= 1e-8 {
                p.constant = Some(s.sqrt());
                p.radius = radius;
                return Ok(p);
            }
            if radius > 4096.0 {
                return Err(Error::InvalidParameter(format!(
                    "lattice sum for the weighted-norm constant did not converge for α = {alpha}"
                )));
            }
            prev = s;
            radius *= 1.25;
        }
    }
}

/// `(∫ |f|² e^{α d(x,0)} dx)^{1/2}`.
///
/// With the ℓ¹ metric the integral factorizes over coordinates for every
/// pair of terms and reduces to one-dimensional adaptive quadratures.
pub fn weighted_norm(f: &TestFunction, params: &WeightedNormParams) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    let alpha = params.alpha;
    let v = match params.metric {
        Metric::L1 => {
            let nt = f.terms().len();
            let mut total = Complex64::new(0.0, 0.0);
            for a in 0..nt {
                for b in 0..nt {
                    let mut prod = f.terms()[a].coeff * f.terms()[b].coeff.conj();
                    for d in 0..f.dim() {
                        if prod == Complex64::new(0.0, 0.0) {
                            break;
                        }
                        prod *= weighted_overlap_1d(f.factor(a, d), f.factor(b, d), alpha)?;
                    }
                    total += prod;
                }
            }
            total.re
        }
        Metric::Euclidean => {
            let (lo, hi) = f.effective_support_box(1e-18);
            nested_integral(&|x: &[f64]| f.eval(x).norm_sqr() * (alpha * Metric::Euclidean.norm(x)).exp(), &lo, &hi, 1e-11)?
        }
    };
    Ok(v.max(0.0).sqrt())
}

fn weighted_overlap_1d(a: &Factor1D, b: &Factor1D, alpha: f64) -> Result<f64> {
    let lo = (a.shift - a.support_half_width()).max(b.shift - b.support_half_width());
    let hi = (a.shift + a.support_half_width()).min(b.shift + b.support_half_width());
    if lo >= hi {
        return Ok(0.0);
    }
    let mut breaks: Vec<f64> = a.breakpoints().into_iter().chain(b.breakpoints()).chain([0.0]).filter(|x| *x > lo && *x < hi).collect();
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let scale = (a.eval(a.shift) * b.eval(b.shift)).abs().max(1e-300);
    adaptive_piecewise(|x: f64| a.eval(x) * b.eval(x) * (alpha * x.abs()).exp(), &breaks, 1e-13 * scale * (hi - lo))
}

/// Iterated adaptive integration over a box.
pub fn nested_integral(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], tol: f64) -> Result<f64> {
    fn rec(f: &dyn Fn(&[f64]) -> f64, prefix: &mut Vec<f64>, lo: &[f64], hi: &[f64], tol: f64) -> Result<f64> {
        let d = prefix.len();
        if d + 1 == lo.len() {
            let mut x = prefix.clone();
            x.push(0.0);
            return adaptive_with_limit(
                &|t: f64| {
                    let mut y = x.clone();
                    y[d] = t;
                    f(&y)
                },
                lo[d],
                hi[d],
                tol,
                4000,
            );
        }
        let inner = |t: f64| -> f64 {
            let mut p = prefix.clone();
            p.push(t);
            rec(f, &mut p, lo, hi, tol).unwrap_or(f64::NAN)
        };
        let v = adaptive_with_limit(&inner, lo[d], hi[d], tol, 4000)?;
        if v.is_nan() {
            return Err(Error::Quadrature("inner integral failed".into()));
        }
        Ok(v)
    }
    rec(f, &mut Vec::new(), lo, hi, tol)
}
