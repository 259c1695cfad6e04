//! Two evaluations of `‖P_Γ(f ⊗ r)‖²` for the Heisenberg scheme: Monte Carlo
//! over a fundamental domain of `Γ_N`, and the lattice sum of group
//! autocorrelations `Σ_γ (f*∗f)(γ₁)(r*∗r)(γ₂)`.
//!
//! Right translation by `γ = (δ, ξ)` acts on `(q, z)` as
//! `(q + δ, z + ξ + Im(q̄ δ))`, so `FD_Δ × FD_Ξ` is a fundamental domain and
//! Lebesgue measure is Haar measure on both factors.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::test_function::Term;
use crate::harmonic::TestFunction;
use crate::quadrature::gauss_legendre;

use super::HScheme;

const CHUNK: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct LatticeSumOptions {
    pub samples: usize,
    pub seed: u64,
    /// Fail when the Monte Carlo standard error exceeds this fraction of the estimate.
    pub stderr_tolerance: Option<f64>,
    /// Gaussian parts are cut where they fall below this fraction of their peak.
    pub support_tol: f64,
    /// Gauss–Legendre nodes per axis for the group autocorrelations.
    pub quad_nodes: usize,
}

impl Default for LatticeSumOptions {
    fn default() -> Self {
        Self { samples: 10_000_000, seed: 0x5eed, stderr_tolerance: None, support_tol: 1e-9, quad_nodes: 40 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeSumReport {
    pub lattice_sum: f64,
    pub mc_quotient_norm: f64,
    pub mc_stderr: f64,
    pub rel_gap: f64,
    pub samples: usize,
    pub lattice_terms: usize,
}

/// Points `(a + b√2, a − b√2)` with the first coordinate in `[lo1, hi1]` and
/// the second in `[lo2, hi2]`.
fn chain_points(lo1: f64, hi1: f64, lo2: f64, hi2: f64, out: &mut Vec<(f64, f64)>) {
    out.clear();
    if !(hi1 >= lo1 && hi2 >= lo2) {
        return;
    }
    let amin = ((lo1 + lo2) / 2.0).floor() as i64;
    let amax = ((hi1 + hi2) / 2.0).ceil() as i64;
    let bmin = ((lo1 - hi2) / (2.0 * SQRT_2)).floor() as i64;
    let bmax = ((hi1 - lo2) / (2.0 * SQRT_2)).ceil() as i64;
    for a in amin..=amax {
        for b in bmin..=bmax {
            let d1 = a as f64 + b as f64 * SQRT_2;
            let d2 = a as f64 - b as f64 * SQRT_2;
            if d1 >= lo1 && d1 <= hi1 && d2 >= lo2 && d2 <= hi2 {
                out.push((d1, d2));
            }
        }
    }
}

/// A test function on `ℂ ⊕ ℝ` split into its terms, with effective supports.
struct Split<'a> {
    terms: &'a [Term],
    lo: [f64; 3],
    hi: [f64; 3],
}

impl<'a> Split<'a> {
    fn new(f: &'a TestFunction, tol: f64) -> Self {
        let (lo, hi) = f.effective_support_box(tol);
        Self { terms: f.terms(), lo: [lo[0], lo[1], lo[2]], hi: [hi[0], hi[1], hi[2]] }
    }
}

fn u1_residual(f: &TestFunction, seed: u64) -> f64 {
    let (lo, hi) = f.support_box();
    let rad = lo.iter().zip(&hi).take(2).map(|(l, h)| l.abs().max(h.abs())).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for _ in 0..256 {
        let q = Complex64::from_polar(rad * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>());
        let z = lo[2] + (hi[2] - lo[2]) * rng.random::<f64>();
        let k = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>()) * q;
        let a = f.eval(&[q.re, q.im, z]);
        let b = f.eval(&[k.re, k.im, z]);
        worst = worst.max((a - b).norm());
        scale = scale.max(a.norm());
    }
    worst / scale.max(1e-300)
}

/// `Σ_γ f(xγ₁) r(xγ₂)` at a sample point `x = (q₁, z₁, q₂, z₂)`.
struct Periodizer<'a> {
    f: Split<'a>,
    r: Split<'a>,
}

impl Periodizer<'_> {
    fn eval(&self, q1: Complex64, z1: f64, q2: Complex64, z2: f64, bufs: &mut Buffers) -> Complex64 {
        let (f, r) = (&self.f, &self.r);
        chain_points(f.lo[0] - q1.re, f.hi[0] - q1.re, r.lo[0] - q2.re, r.hi[0] - q2.re, &mut bufs.re);
        if bufs.re.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        chain_points(f.lo[1] - q1.im, f.hi[1] - q1.im, r.lo[1] - q2.im, r.hi[1] - q2.im, &mut bufs.im);
        let mut acc = Complex64::new(0.0, 0.0);
        for s in f.terms {
            for t in r.terms {
                let c = s.coeff * t.coeff;
                // per-axis factor values for the planar part
                bufs.fre.clear();
                bufs.fre.extend(bufs.re.iter().map(|&(d1, d2)| s.factors[0].eval(q1.re + d1) * t.factors[0].eval(q2.re + d2)));
                bufs.fim.clear();
                bufs.fim.extend(bufs.im.iter().map(|&(d1, d2)| s.factors[1].eval(q1.im + d1) * t.factors[1].eval(q2.im + d2)));
                for (i, &(a1, a2)) in bufs.re.iter().enumerate() {
                    if bufs.fre[i] == 0.0 {
                        continue;
                    }
                    for (j, &(b1, b2)) in bufs.im.iter().enumerate() {
                        let planar = bufs.fre[i] * bufs.fim[j];
                        if planar == 0.0 {
                            continue;
                        }
                        let d1 = Complex64::new(a1, b1);
                        let d2 = Complex64::new(a2, b2);
                        let t1 = z1 + (q1.conj() * d1).im;
                        let t2 = z2 + (q2.conj() * d2).im;
                        chain_points(f.lo[2] - t1, f.hi[2] - t1, r.lo[2] - t2, r.hi[2] - t2, &mut bufs.z);
                        let mut central = 0.0;
                        for &(x1, x2) in &bufs.z {
                            central += s.factors[2].eval(t1 + x1) * t.factors[2].eval(t2 + x2);
                        }
                        acc += c * (planar * central);
                    }
                }
            }
        }
        acc
    }
}

#[derive(Default)]
struct Buffers {
    re: Vec<(f64, f64)>,
    im: Vec<(f64, f64)>,
    z: Vec<(f64, f64)>,
    fre: Vec<f64>,
    fim: Vec<f64>,
}

fn monte_carlo(p: &Periodizer, covol: f64, samples: usize, seed: u64) -> (f64, f64) {
    let chunks = samples.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut bufs = Buffers::default();
            let mut s = 0.0;
            let mut s2 = 0.0;
            let mut cell = || {
                let a = rng.random::<f64>() - 0.5;
                let b = rng.random::<f64>() - 0.5;
                (a + b * SQRT_2, a - b * SQRT_2)
            };
            for _ in 0..n {
                let (x1, x2) = cell();
                let (y1, y2) = cell();
                let (z1, z2) = cell();
                let v = p.eval(Complex64::new(x1, y1), z1, Complex64::new(x2, y2), z2, &mut bufs).norm_sqr() * covol;
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / (n - 1.0).max(1.0)).sqrt())
}

/// Group autocorrelation `(f*∗f)(g) = ∫ conj f(y) f(y·g) dy` on `ℂ ⊕ ℝ`.
///
/// The central integral is done in closed form (it is a one-dimensional
/// autocorrelation of the central factors evaluated at `g_z + Im(ȳ g_q)`), the
/// planar one by tensor Gauss–Legendre on the overlap of the supports.
struct GroupAutocorr {
    pairs: Vec<(Complex64, usize, usize, TestFunction)>,
    terms: Vec<Term>,
    lo: [f64; 2],
    hi: [f64; 2],
    nodes: usize,
}

impl GroupAutocorr {
    fn new(f: &TestFunction, tol: f64, nodes: usize) -> Self {
        let terms = f.terms().to_vec();
        let mut pairs = Vec::new();
        for (i, s) in terms.iter().enumerate() {
            for (j, t) in terms.iter().enumerate() {
                let fs = TestFunction::from_factor(s.factors[2].clone(), 1.0);
                let ft = TestFunction::from_factor(t.factors[2].clone(), 1.0);
                pairs.push((s.coeff.conj() * t.coeff, i, j, fs.involution().convolve(&ft)));
            }
        }
        let (lo, hi) = f.effective_support_box(tol);
        Self { pairs, terms, lo: [lo[0], lo[1]], hi: [hi[0], hi[1]], nodes }
    }

    /// Crude upper bound from the planar factors alone, used to skip lattice
    /// points.
    fn planar_envelope(&self, g: Complex64) -> f64 {
        let w = [self.hi[0] - self.lo[0], self.hi[1] - self.lo[1]];
        if g.re.abs() > w[0] || g.im.abs() > w[1] {
            return 0.0;
        }
        let rule = gauss_legendre(self.nodes);
        let mut total = 0.0;
        for (c, i, j, central) in &self.pairs {
            let mut prod = c.norm() * central_sup(central);
            for (axis, shift) in [(0usize, g.re), (1usize, g.im)] {
                let (a, b) = (self.lo[axis].max(self.lo[axis] - shift), self.hi[axis].min(self.hi[axis] - shift));
                if !(b > a) {
                    prod = 0.0;
                    break;
                }
                let (fs, ft) = (&self.terms[*i].factors[axis], &self.terms[*j].factors[axis]);
                let h = 0.5 * (b - a);
                let mut acc = 0.0;
                for (x, wgt) in rule.nodes.iter().zip(&rule.weights) {
                    let y = a + h * (1.0 + x);
                    acc += wgt * h * fs.eval(y) * ft.eval(y + shift);
                }
                prod *= acc;
            }
            total += prod;
        }
        total
    }

    fn eval(&self, gq: Complex64, gz: f64) -> Complex64 {
        let rule = gauss_legendre(self.nodes);
        let axis = |k: usize, shift: f64| -> Vec<(f64, f64)> {
            let (a, b) = (self.lo[k].max(self.lo[k] - shift), self.hi[k].min(self.hi[k] - shift));
            if !(b > a) {
                return Vec::new();
            }
            let h = 0.5 * (b - a);
            rule.nodes.iter().zip(&rule.weights).map(|(x, w)| (a + h * (1.0 + x), h * w)).collect()
        };
        let xs = axis(0, gq.re);
        let ys = axis(1, gq.im);
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, i, j, central) in &self.pairs {
            let (s, t) = (&self.terms[*i], &self.terms[*j]);
            let fx: Vec<f64> = xs.iter().map(|&(x, w)| w * s.factors[0].eval(x) * t.factors[0].eval(x + gq.re)).collect();
            let fy: Vec<f64> = ys.iter().map(|&(y, w)| w * s.factors[1].eval(y) * t.factors[1].eval(y + gq.im)).collect();
            let mut part = Complex64::new(0.0, 0.0);
            for (a, &(x, _)) in xs.iter().enumerate() {
                if fx[a] == 0.0 {
                    continue;
                }
                for (b, &(y, _)) in ys.iter().enumerate() {
                    // Im(ȳ g) for y = x + iy
                    let shift = x * gq.im - y * gq.re;
                    part += central.eval(&[gz + shift]) * (fx[a] * fy[b]);
                }
            }
            acc += c * part;
        }
        acc
    }

    fn central_reach(&self) -> f64 {
        self.pairs
            .iter()
            .map(|p| {
                let (lo, hi) = p.3.effective_support_box(1e-12);
                lo[0].abs().max(hi[0].abs())
            })
            .fold(0.0, f64::max)
    }

    fn planar_radius(&self) -> f64 {
        (self.lo[0].abs().max(self.hi[0].abs())).hypot(self.lo[1].abs().max(self.hi[1].abs()))
    }
}

fn central_sup(f: &TestFunction) -> f64 {
    // central autocorrelations of nonnegative factors peak at their centre
    let (lo, hi) = f.support_box();
    f.eval(&[0.5 * (lo[0] + hi[0])]).norm().max(f.eval(&[0.0]).norm())
}

/// Compares Monte Carlo and lattice-sum evaluations of `‖P_Γ(f ⊗ r)‖²`; `f`
/// must be invariant under rotations of the planar coordinate.
pub fn lattice_sum_identity_check(
    hscheme: &HScheme,
    f: &TestFunction,
    r: &TestFunction,
    opts: &LatticeSumOptions,
) -> Result<LatticeSumReport> {
    for g in [f, r] {
        if g.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: g.dim() });
        }
    }
    if f.is_zero() || r.is_zero() {
        return Ok(LatticeSumReport { lattice_sum: 0.0, mc_quotient_norm: 0.0, mc_stderr: 0.0, rel_gap: 0.0, samples: 0, lattice_terms: 0 });
    }
    let residual = u1_residual(f, opts.seed);
    if residual > 1e-8 {
        return Err(Error::NotInvariant { residual });
    }
    let covol = hscheme.covolume();
    let per = Periodizer { f: Split::new(f, opts.support_tol), r: Split::new(r, opts.support_tol) };
    let (mc, stderr) = monte_carlo(&per, covol, opts.samples, opts.seed);
    if let Some(tol) = opts.stderr_tolerance {
        if stderr > tol * mc.abs() {
            return Err(Error::MonteCarlo { stderr, tolerance: tol * mc.abs() });
        }
    }

    let af = GroupAutocorr::new(f, opts.support_tol, opts.quad_nodes);
    let ar = GroupAutocorr::new(r, opts.support_tol, opts.quad_nodes);
    let wf = [af.hi[0] - af.lo[0], af.hi[1] - af.lo[1]];
    let wr = [ar.hi[0] - ar.lo[0], ar.hi[1] - ar.lo[1]];
    let mut re = Vec::new();
    let mut im = Vec::new();
    chain_points(-wf[0], wf[0], -wr[0], wr[0], &mut re);
    chain_points(-wf[1], wf[1], -wr[1], wr[1], &mut im);
    let peak_f = af.eval(Complex64::new(0.0, 0.0), 0.0).norm();
    let peak_r = ar.eval(Complex64::new(0.0, 0.0), 0.0).norm();
    let cut = 1e-13;
    let deltas: Vec<(Complex64, Complex64)> = re
        .iter()
        .flat_map(|&(a1, a2)| im.iter().map(move |&(b1, b2)| (Complex64::new(a1, b1), Complex64::new(a2, b2))))
        .filter(|(d1, d2)| af.planar_envelope(*d1) * ar.planar_envelope(*d2) > cut * peak_f * peak_r)
        .collect();
    let (reach_f, reach_r) = (af.central_reach(), ar.central_reach());
    let (rad_f, rad_r) = (af.planar_radius(), ar.planar_radius());
    let (sum, terms) = deltas
        .par_iter()
        .map(|&(d1, d2)| {
            let b1 = reach_f + rad_f * d1.norm();
            let b2 = reach_r + rad_r * d2.norm();
            let mut xi = Vec::new();
            chain_points(-b1, b1, -b2, b2, &mut xi);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut n = 0usize;
            for (x1, x2) in xi {
                let v1 = af.eval(d1, x1);
                if v1.norm() <= cut * peak_f {
                    continue;
                }
                acc += v1 * ar.eval(d2, x2);
                n += 1;
            }
            (acc, n)
        })
        .reduce(|| (Complex64::new(0.0, 0.0), 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let lattice_sum = sum.re;
    let rel_gap = (mc - lattice_sum).abs() / lattice_sum.abs().max(1e-300);
    Ok(LatticeSumReport { lattice_sum, mc_quotient_norm: mc, mc_stderr: stderr, rel_gap, samples: opts.samples, lattice_terms: terms })
}
