//! The three-dimensional Heisenberg group `ℂ ⊕_β ℝ` with `β(q, q′) = Im(q̄ q′)`,
//! its arithmetic lattice built from `ℤ[i]` and `ℤ[√2]`, and the
//! corresponding model sets.
//!
//! Points of the lattice `Γ_N` are written with six integers
//! `(a_re, a_im, b_re, b_im, c, d)`: the first-factor point is
//! `(a + b√2, c + d√2)` and the second-factor point its Galois conjugate
//! `(a − b√2, c − d√2)`, with `a, b ∈ ℤ[i]`.

pub mod branches;
pub mod laguerre;
pub mod lattice_sum;
pub mod twisted;

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::autocorr::{AutocorrAtom, EmpiricalAutocorrelation, NeighbourGrid, RadialAtom};
use crate::error::{Error, Result};
use crate::lattice::quadratic::QuadraticNumber;
use crate::lattice::{enumerate_points, ExactMatrix, LatticeBasis, Region};
use crate::scheme::{Geometry, ModelPoint, ModelSet, Scheme, Window};

pub use branches::{bessel_branch_coefficient, nilpotent_branch_coefficient, BesselCoefficient, NilpotentCoefficient, NilpotentOptions};
pub use laguerre::LaguerreSpherical;
pub use lattice_sum::{lattice_sum_identity_check, LatticeSumReport, LatticeSumOptions};
pub use twisted::{associativity_residual, partial_central_transform, twisted_convolution, twisted_convolution_alt, Cubature};

/// A point `(q, z)` of the Heisenberg group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub q: Complex64,
    pub z: f64,
}

impl HPoint {
    pub const IDENTITY: HPoint = HPoint { q: Complex64 { re: 0.0, im: 0.0 }, z: 0.0 };

    pub fn new(q: Complex64, z: f64) -> Self {
        Self { q, z }
    }

    /// Coordinates `(Re q, Im q, z)`.
    pub fn from_coords(x: &[f64]) -> Self {
        Self { q: Complex64::new(x[0], x[1]), z: x[2] }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.q.re, self.q.im, self.z]
    }
}

/// `β(q, q′) = Im(q̄ q′)`.
pub fn beta(q: Complex64, q2: Complex64) -> f64 {
    (q.conj() * q2).im
}

/// `(q, z)(q′, z′) = (q + q′, z + z′ + Im(q̄ q′))`.
pub fn h_mul(a: HPoint, b: HPoint) -> HPoint {
    HPoint { q: a.q + b.q, z: a.z + b.z + beta(a.q, b.q) }
}

pub fn h_inv(a: HPoint) -> HPoint {
    HPoint { q: -a.q, z: -a.z }
}

/// Gaussian integer `re + i·im`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }
    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }
    pub fn norm(self) -> i64 {
        self.re * self.re + self.im * self.im
    }
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }
}

impl Add for GaussInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}
impl Sub for GaussInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}
impl Neg for GaussInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}
impl Mul for GaussInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

/// `u + v√2` with `u, v ∈ ℤ[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ZiSqrt2 {
    pub u: GaussInt,
    pub v: GaussInt,
}

impl ZiSqrt2 {
    pub fn new(u: GaussInt, v: GaussInt) -> Self {
        Self { u, v }
    }
    pub fn is_zero(&self) -> bool {
        self.u == GaussInt::default() && self.v == GaussInt::default()
    }
    /// Complex conjugation (fixes √2).
    pub fn conj(self) -> Self {
        Self { u: self.u.conj(), v: self.v.conj() }
    }
    /// `√2 ↦ −√2`.
    pub fn galois(self) -> Self {
        Self { u: self.u, v: -self.v }
    }
    /// Imaginary part as an element `c + d√2` of `ℤ[√2]`.
    pub fn im(self) -> (i64, i64) {
        (self.u.im, self.v.im)
    }
    pub fn to_complex(self) -> Complex64 {
        self.u.to_complex() + self.v.to_complex() * SQRT_2
    }
}

impl Add for ZiSqrt2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { u: self.u + o.u, v: self.v + o.v }
    }
}
impl Mul for ZiSqrt2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let two = GaussInt::new(2, 0);
        Self { u: self.u * o.u + two * self.v * o.v, v: self.u * o.v + self.v * o.u }
    }
}

/// An element of `Γ_N` in integer coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeElement {
    pub a: GaussInt,
    pub b: GaussInt,
    pub c: i64,
    pub d: i64,
}

impl LatticeElement {
    pub fn from_coords(k: &[i64]) -> Self {
        Self { a: GaussInt::new(k[0], k[1]), b: GaussInt::new(k[2], k[3]), c: k[4], d: k[5] }
    }

    pub fn coords(&self) -> [i64; 6] {
        [self.a.re, self.a.im, self.b.re, self.b.im, self.c, self.d]
    }

    /// `a + b√2`.
    pub fn delta(&self) -> ZiSqrt2 {
        ZiSqrt2::new(self.a, self.b)
    }

    pub fn first(&self) -> HPoint {
        HPoint::new(self.delta().to_complex(), self.c as f64 + self.d as f64 * SQRT_2)
    }

    pub fn second(&self) -> HPoint {
        HPoint::new(self.delta().galois().to_complex(), self.c as f64 - self.d as f64 * SQRT_2)
    }

    /// Product in `Γ_N`, computed exactly.
    pub fn mul(&self, o: &LatticeElement) -> LatticeElement {
        let (dc, dd) = cocycle(self.delta(), o.delta());
        LatticeElement { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c + dc, d: self.d + o.d + dd }
    }

    pub fn inv(&self) -> LatticeElement {
        LatticeElement { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }
}

/// `β₁(δ₁, δ′₁)` as `c + d√2 ∈ ℤ[√2]`: `c = Im(ā a′ + 2 b̄ b′)`,
/// `d = Im(ā b′ + b̄ a′)`.
pub fn cocycle(x: ZiSqrt2, y: ZiSqrt2) -> (i64, i64) {
    (x.conj() * y).im()
}

/// The cut-and-project scheme `(N₁, N₂, Γ_N)` with `Δ = {(a + b√2, a − b√2)}`,
/// `a, b ∈ ℤ[i]`, and `Ξ = {(c + d√2, c − d√2)}`, `c, d ∈ ℤ`.
#[derive(Clone, Debug)]
pub struct HScheme {
    linear: Scheme,
}

impl Default for HScheme {
    fn default() -> Self {
        Self::new()
    }
}

impl HScheme {
    pub fn new() -> Self {
        let q = |a, b| QuadraticNumber::from_integers(a, b, 2);
        let z = q(0, 0);
        let col = |v: [QuadraticNumber; 6]| v.to_vec();
        let exact = ExactMatrix::from_columns(vec![
            col([q(1, 0), z, z, q(1, 0), z, z]),
            col([z, q(1, 0), z, z, q(1, 0), z]),
            col([q(0, 1), z, z, q(0, -1), z, z]),
            col([z, q(0, 1), z, z, q(0, -1), z]),
            col([z, z, q(1, 0), z, z, q(1, 0)]),
            col([z, z, q(0, 1), z, z, q(0, -1)]),
        ])
        .expect("6x6");
        let basis = LatticeBasis::from_exact(exact).expect("nonsingular");
        Self { linear: Scheme::new(3, 3, basis).expect("dims") }
    }

    /// `Γ_N` viewed as a linear lattice in ℝ⁶ with coordinates
    /// `(Re q₁, Im q₁, z₁, Re q₂, Im q₂, z₂)`.
    pub fn linear(&self) -> &Scheme {
        &self.linear
    }

    /// `covol(Γ_N) = (2√2)³`.
    pub fn covolume(&self) -> f64 {
        self.linear.covolume()
    }

    /// `covol(Δ) = (2√2)²` in `ℂ × ℂ`.
    pub fn delta_covolume(&self) -> f64 {
        8.0
    }

    /// `covol(Ξ) = 2√2` in `ℝ × ℝ`.
    pub fn xi_covolume(&self) -> f64 {
        2.0 * SQRT_2
    }

    /// Checks that `β₁ + β₂` closes up in `Ξ` on all pairs with
    /// `|a|, |b|, |a′|, |b′| ≤ bound` (Gaussian-integer modulus): the second
    /// component must be the Galois conjugate of the first. Returns the
    /// number of pairs checked.
    pub fn verify_cocycle_closure(&self, bound: i64) -> std::result::Result<usize, (ZiSqrt2, ZiSqrt2)> {
        let mut ints = Vec::new();
        for re in -bound..=bound {
            for im in -bound..=bound {
                let g = GaussInt::new(re, im);
                if g.norm() <= bound * bound {
                    ints.push(g);
                }
            }
        }
        let deltas: Vec<ZiSqrt2> = ints.iter().flat_map(|&a| ints.iter().map(move |&b| ZiSqrt2::new(a, b))).collect();
        let failures: Vec<(ZiSqrt2, ZiSqrt2)> = deltas
            .par_iter()
            .flat_map_iter(|&x| {
                deltas.iter().filter_map(move |&y| {
                    let (c, d) = cocycle(x, y);
                    // second factor computed independently from the conjugates
                    let (c2, d2) = (x.galois().conj() * y.galois()).im();
                    let explicit_c = (x.u.conj() * y.u).im + 2 * (x.v.conj() * y.v).im;
                    let explicit_d = (x.u.conj() * y.v).im + (x.v.conj() * y.u).im;
                    (c != explicit_c || d != explicit_d || c2 != c || d2 != -d).then_some((x, y))
                })
            })
            .collect();
        match failures.first() {
            Some(&f) => Err(f),
            None => Ok(deltas.len() * deltas.len()),
        }
    }
}

/// The model set `{δ₁-part of γ : second-factor part of γ ∈ W}` inside a
/// bounded region of `N₁ ≅ ℝ³`. The window is a subset of `N₂ ≅ ℝ³` in
/// coordinates `(Re q₂, Im q₂, z₂)`.
pub fn h_model_set(hscheme: &HScheme, window: &Window, region: &Region) -> Result<ModelSet> {
    if region.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: region.dim() });
    }
    if !region.is_bounded() {
        return Err(Error::UnboundedRegion);
    }
    let mut ms = ModelSet {
        scheme: hscheme.linear.clone(),
        window: window.clone(),
        region: region.clone(),
        geometry: Geometry::Heisenberg,
        points: Vec::new(),
    };
    if window.is_empty() || region.is_empty() {
        return Ok(ms);
    }
    if window.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: window.dim() });
    }
    window.validate()?;
    let (plo, phi) = region.bounding_box();
    let (wlo, whi) = window.bounding_box();
    let search = Region::Box { lo: [plo, wlo].concat(), hi: [phi, whi].concat() };
    ms.points = enumerate_points(hscheme.linear.lattice(), &search)?
        .into_iter()
        .filter(|p| region.contains(&p.point[..3]) && window.contains(&p.point[3..]))
        .map(|p| {
            // recompute from exact integers to avoid accumulated rounding
            let e = LatticeElement::from_coords(&p.coords);
            let (x, y) = (e.first(), e.second());
            ModelPoint { coords: p.coords, physical: x.coords().to_vec(), internal: y.coords().to_vec() }
        })
        .collect();
    Ok(ms)
}

fn required_neighbourhood(f_t: &Region, cutoff: f64) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = f_t.bounding_box();
    let qmax = (lo[0].abs().max(hi[0].abs()).powi(2) + lo[1].abs().max(hi[1].abs()).powi(2)).sqrt();
    let pad = [cutoff, cutoff, cutoff + qmax * cutoff];
    (
        lo.iter().zip(pad).map(|(v, p)| v - p).collect(),
        hi.iter().zip(pad).map(|(v, p)| v + p).collect(),
    )
}

/// Window-averaged autocorrelation with Heisenberg differences `x⁻¹y`,
/// truncated to `|x⁻¹y| ≤ R` in the coordinates `(Re q, Im q, z)`.
/// Radialization over U(1) keys atoms by the exact invariants `(|q|², z)`.
pub fn h_empirical_autocorr(model_set: &ModelSet, f_t: &Region, cutoff: f64) -> Result<EmpiricalAutocorrelation> {
    let volume = f_t.volume();
    if !(volume > 0.0) {
        return Err(Error::ZeroVolume);
    }
    let (nlo, nhi) = required_neighbourhood(f_t, cutoff);
    if !model_set.region.contains_neighbourhood(&Region::Box { lo: nlo, hi: nhi }, 0.0) {
        return Err(Error::InsufficientMargin { margin: cutoff });
    }
    let pts = model_set.physical_points();
    let grid = NeighbourGrid::new(&pts, cutoff.max(1e-9));
    let r2 = cutoff * cutoff;
    let counts: HashMap<LatticeElement, u64> = model_set
        .points
        .par_iter()
        .filter(|x| f_t.contains(&x.physical))
        .fold(
            || (HashMap::<LatticeElement, u64>::new(), Vec::new()),
            |(mut map, mut buf), x| {
                let qx = x.physical[0].hypot(x.physical[1]);
                let pad = [cutoff, cutoff, cutoff + qx * cutoff];
                let lo: Vec<f64> = x.physical.iter().zip(pad).map(|(v, p)| v - p).collect();
                let hi: Vec<f64> = x.physical.iter().zip(pad).map(|(v, p)| v + p).collect();
                grid.candidates(&lo, &hi, &mut buf);
                let hx = HPoint::from_coords(&x.physical);
                let ex = LatticeElement::from_coords(&x.coords);
                for &j in &buf {
                    let y = &model_set.points[j];
                    let w = h_mul(h_inv(hx), HPoint::from_coords(&y.physical));
                    if w.q.norm_sqr() + w.z * w.z <= r2 {
                        let key = ex.inv().mul(&LatticeElement::from_coords(&y.coords));
                        *map.entry(key).or_insert(0) += 1;
                    }
                }
                (map, buf)
            },
        )
        .map(|(m, _)| m)
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let sorted: BTreeMap<Vec<i64>, (LatticeElement, u64)> = counts.into_iter().map(|(k, v)| (k.coords().to_vec(), (k, v))).collect();
    let mut radial: BTreeMap<(i64, i64, i64, i64), RadialAtom> = BTreeMap::new();
    let mut atoms = Vec::with_capacity(sorted.len());
    for (key, (e, c)) in sorted {
        let coeff = c as f64 / volume;
        let p = e.first();
        // |a + b√2|² = |a|² + 2|b|² + 2√2 Re(ā b)
        let ab = e.a.conj() * e.b;
        let rkey = (e.a.norm() + 2 * e.b.norm(), 2 * ab.re, e.c, e.d);
        let r = radial.entry(rkey).or_insert(RadialAtom { label: vec![p.q.norm(), p.z], multiplicity: 0, coeff: 0.0 });
        r.multiplicity += 1;
        r.coeff += coeff;
        atoms.push(AutocorrAtom { key, z: p.coords().to_vec(), coeff });
    }
    Ok(EmpiricalAutocorrelation {
        cutoff,
        volume,
        geometry: Geometry::Heisenberg,
        atoms,
        radial: Some(radial.into_values().collect()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng) -> HPoint {
        HPoint::new(Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)), rng.random_range(-3.0..3.0))
    }

    #[test]
    fn group_law_examples() {
        let p = h_mul(HPoint::new(Complex64::new(1.0, 0.0), 0.0), HPoint::new(Complex64::new(0.0, 1.0), 0.0));
        assert_eq!(p, HPoint::new(Complex64::new(1.0, 1.0), 1.0));
        let x = HPoint::new(Complex64::new(0.3, -2.0), 1.5);
        assert_eq!(h_mul(x, HPoint::IDENTITY), x);
        assert_eq!(h_mul(x, h_inv(x)), HPoint::IDENTITY);
    }

    #[test]
    fn associativity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
            let l = h_mul(h_mul(a, b), c);
            let r = h_mul(a, h_mul(b, c));
            assert!((l.q - r.q).norm() <= 1e-12 && (l.z - r.z).abs() <= 1e-12);
        }
    }

    #[test]
    fn lattice_product_matches_group_law() {
        let x = LatticeElement::from_coords(&[1, -2, 0, 3, 4, -1]);
        let y = LatticeElement::from_coords(&[-3, 1, 2, 2, 0, 5]);
        let p = x.mul(&y);
        for (exact, a, b) in [(p.first(), x.first(), y.first()), (p.second(), x.second(), y.second())] {
            let g = h_mul(a, b);
            assert!((g.q - exact.q).norm() < 1e-12 && (g.z - exact.z).abs() < 1e-12);
        }
        assert_eq!(x.mul(&x.inv()), LatticeElement::from_coords(&[0; 6]));
    }

    #[test]
    fn cocycle_closure_small_sample() {
        assert_eq!(HScheme::new().verify_cocycle_closure(2).unwrap(), 13usize.pow(4));
    }

    #[test]
    fn covolumes() {
        let h = HScheme::new();
        assert!((h.covolume() - (2.0 * SQRT_2).powi(3)).abs() < 1e-10);
        assert!((h.delta_covolume() * h.xi_covolume() - h.covolume()).abs() < 1e-10);
    }

    #[test]
    fn model_set_matches_brute_force() {
        let h = HScheme::new();
        let w = Window::Box { lo: vec![-1.0, -1.0, -1.0], hi: vec![1.0, 1.0, 1.0] };
        let region = Region::cube(3, 3.0);
        let ms = h_model_set(&h, &w, &region).unwrap();
        let mut brute = 0;
        let r = 6i64;
        for ar in -r..=r {
            for ai in -r..=r {
                for br in -r..=r {
                    for bi in -r..=r {
                        for c in -r..=r {
                            for d in -r..=r {
                                let e = LatticeElement::from_coords(&[ar, ai, br, bi, c, d]);
                                if region.contains(&e.first().coords()) && w.contains(&e.second().coords()) {
                                    brute += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(ms.len(), brute);
        assert!(ms.len() > 10);
        let empty = h_model_set(&h, &Window::Empty { dim: 3 }, &region).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn autocorrelation_identity_and_inverse_symmetry() {
        let h = HScheme::new();
        let w = Window::Box { lo: vec![-1.0, -1.0, -1.0], hi: vec![1.0, 1.0, 1.0] };
        let ms = h_model_set(&h, &w, &Region::Box { lo: vec![-9.0, -9.0, -60.0], hi: vec![9.0, 9.0, 60.0] }).unwrap();
        let f_t = Region::cube(3, 5.0);
        let ac = h_empirical_autocorr(&ms, &f_t, 2.0).unwrap();
        let inside = ms.points.iter().filter(|p| f_t.contains(&p.physical)).count() as f64;
        assert!((ac.identity_coefficient() - inside / f_t.volume()).abs() < 1e-12);
        // c(w) and c(w⁻¹) differ only through boundary terms
        let mut worst = 0.0f64;
        for a in &ac.atoms {
            let inv = LatticeElement::from_coords(&a.key).inv();
            worst = worst.max((a.coeff - ac.coefficient(&inv.coords())).abs());
        }
        assert!(worst <= 2.0 * 60.0 / f_t.volume());
        let single = ModelSet { points: ms.points[..1].to_vec(), ..ms.clone() };
        let f_single = Region::Box { lo: single.points[0].physical.iter().map(|v| v - 0.1).collect(), hi: single.points[0].physical.iter().map(|v| v + 0.1).collect() };
        if let Ok(ac1) = h_empirical_autocorr(&single, &f_single, 2.0) {
            assert_eq!(ac1.atoms.len(), 1);
            assert_eq!(ac1.atoms[0].key, vec![0; 6]);
        }
    }
}
