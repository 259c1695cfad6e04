//! Lattice bases, duals, covolumes and point enumeration in bounded regions.
//!
//! Characters are written `x ↦ e^{2πi⟨λ,x⟩}` throughout the crate, so the dual
//! lattice is the inverse transpose of the basis with no factors of 2π.

pub mod quadratic;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use quadratic::{QuadraticNumber, Rational};

/// Entrywise agreement required between an exact basis and its float image.
pub const EXACT_FLOAT_TOLERANCE: f64 = 1e-12;
/// Absolute tolerance for float lattice-membership tests.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;
const SINGULAR_DET: f64 = 1e-300;

/// Square matrix with entries in a real quadratic field, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix {
    dim: usize,
    entries: Vec<QuadraticNumber>,
}

impl ExactMatrix {
    /// Builds from columns; `columns[j][i]` is row `i` of column `j`.
    pub fn from_columns(columns: Vec<Vec<QuadraticNumber>>) -> Result<Self> {
        let dim = columns.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for col in &columns {
            if col.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: col.len() });
            }
            entries.extend_from_slice(col);
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> QuadraticNumber {
        self.entries[col * self.dim + row]
    }

    fn set(&mut self, row: usize, col: usize, v: QuadraticNumber) {
        self.entries[col * self.dim + row] = v;
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).to_f64())
    }

    pub fn transpose(&self) -> Self {
        let mut t = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(i, j, self.get(j, i));
            }
        }
        t
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self {
            dim: n,
            entries: (0..n * n)
                .map(|k| if k % (n + 1) == 0 { QuadraticNumber::integer(1) } else { QuadraticNumber::integer(0) })
                .collect(),
        };
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (a.get(col, j), a.get(pivot, j));
                    a.set(col, j, y);
                    a.set(pivot, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, y);
                    inv.set(pivot, j, x);
                }
            }
            let p = a.get(col, col).recip()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j) * p);
                inv.set(col, j, inv.get(col, j) * p);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j) - factor * a.get(col, j));
                    inv.set(r, j, inv.get(r, j) - factor * inv.get(col, j));
                }
            }
        }
        Some(inv)
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[QuadraticNumber]) -> Vec<QuadraticNumber> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(QuadraticNumber::integer(0), |acc, j| acc + self.get(i, j) * v[j])
            })
            .collect()
    }
}

/// A full-rank lattice given by generator columns, optionally with exact entries.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    columns: DMatrix<f64>,
    inverse: DMatrix<f64>,
    exact: Option<ExactMatrix>,
}

impl LatticeBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if !columns.is_square() {
            return Err(Error::DimensionMismatch { expected: columns.nrows(), got: columns.ncols() });
        }
        let det = columns.determinant();
        if !det.is_finite() || det.abs() < SINGULAR_DET {
            return Err(Error::DegenerateLattice { det });
        }
        let inverse = columns.clone().try_inverse().ok_or(Error::DegenerateLattice { det })?;
        Ok(Self { columns, inverse, exact: None })
    }

    /// `columns[j]` is the `j`-th generator.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        for c in columns {
            if c.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.len() });
            }
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| columns[j][i]))
    }

    pub fn from_exact(exact: ExactMatrix) -> Result<Self> {
        let mut basis = Self::new(exact.to_f64())?;
        basis.exact = Some(exact);
        Ok(basis)
    }

    /// Attaches an exact form, checking it reproduces the float columns.
    pub fn with_exact(mut self, exact: ExactMatrix) -> Result<Self> {
        if exact.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: exact.dim() });
        }
        let f = exact.to_f64();
        let err = (&f - &self.columns).amax();
        if err > EXACT_FLOAT_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "exact basis differs from float basis by {err:.3e}"
            )));
        }
        self.exact = Some(exact);
        Ok(self)
    }

    pub fn identity(dim: usize) -> Self {
        let exact = ExactMatrix::from_columns(
            (0..dim)
                .map(|j| (0..dim).map(|i| QuadraticNumber::integer((i == j) as i64)).collect())
                .collect(),
        )
        .expect("square");
        Self::from_exact(exact).expect("identity is nonsingular")
    }

    pub fn dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn exact(&self) -> Option<&ExactMatrix> {
        self.exact.as_ref()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.columns.column(j).iter().copied().collect()
    }

    /// The lattice point `B·coords`.
    pub fn point(&self, coords: &[i64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for (j, &c) in coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let cf = c as f64;
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.columns[(i, j)] * cf;
            }
        }
        out
    }

    /// Real coordinates `B⁻¹·x`.
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.inverse[(i, j)] * x[j]).sum()).collect()
    }

    /// Float membership test with absolute tolerance [`MEMBERSHIP_TOLERANCE`].
    pub fn contains(&self, x: &[f64]) -> Option<Vec<i64>> {
        let c = self.coordinates(x);
        let rounded: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        let back = self.point(&rounded);
        let err = back.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (err <= MEMBERSHIP_TOLERANCE).then_some(rounded)
    }

    /// Exact membership test; `None` when the basis carries no exact form.
    pub fn contains_exact(&self, x: &[QuadraticNumber]) -> Option<Option<Vec<i64>>> {
        let exact = self.exact.as_ref()?;
        let inv = exact.inverse()?;
        let c = inv.apply(x);
        if c.iter().all(QuadraticNumber::is_integer) {
            Some(Some(c.iter().map(|v| v.a.to_integer() as i64).collect()))
        } else {
            Some(None)
        }
    }

    /// |det B|.
    pub fn covolume(&self) -> f64 {
        self.columns.determinant().abs()
    }

    /// The dual lattice `{ξ : ⟨ξ, γ⟩ ∈ ℤ ∀γ}` with basis `B^{-T}`.
    pub fn dual(&self) -> Result<Self> {
        let columns = self.inverse.transpose();
        let mut dual = Self::new(columns)?;
        if let Some(exact) = &self.exact {
            if let Some(inv) = exact.inverse() {
                dual.exact = Some(inv.transpose());
            }
        }
        Ok(dual)
    }

    /// Replace columns by `B·U` for a unimodular integer matrix `U`.
    pub fn recombined(&self, unimodular: &DMatrix<i64>) -> Result<Self> {
        let u = unimodular.map(|v| v as f64);
        let det = u.determinant().round();
        if det.abs() != 1.0 {
            return Err(Error::InvalidParameter("recombination matrix is not unimodular".into()));
        }
        Self::new(&self.columns * u)
    }
}

/// Covolume of a lattice (absolute determinant of its basis).
pub fn covolume(basis: &LatticeBasis) -> f64 {
    basis.covolume()
}

/// The dual lattice (inverse transpose).
pub fn dual_lattice(basis: &LatticeBasis) -> Result<LatticeBasis> {
    basis.dual()
}

/// A bounded subset of ℝᵈ used for enumeration and averaging.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Closed axis-parallel box.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Lower-closed, upper-open box.
    HalfOpenBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Region::Box { lo: vec![-half_width; dim], hi: vec![half_width; dim] }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Region::Box { lo: vec![lo], hi: vec![hi] }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } | Region::HalfOpenBox { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Region::Box { lo, hi } | Region::HalfOpenBox { lo, hi } => {
                lo.len() == hi.len() && lo.iter().chain(hi).all(|v| v.is_finite())
            }
            Region::Ball { center, radius } => radius.is_finite() && center.iter().all(|v| v.is_finite()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Box { lo, hi } => lo.iter().zip(hi).any(|(l, h)| l > h),
            Region::HalfOpenBox { lo, hi } => lo.iter().zip(hi).any(|(l, h)| l >= h),
            Region::Ball { radius, .. } => *radius < 0.0,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h),
            Region::HalfOpenBox { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v < *h),
            Region::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
            }
        }
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        match self {
            Region::Box { lo, hi } | Region::HalfOpenBox { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Region::Ball { center, radius } => unit_ball_volume(center.len()) * radius.powi(center.len() as i32),
        }
    }

    /// Closed bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Box { lo, hi } | Region::HalfOpenBox { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let add = |v: &Vec<f64>| v.iter().zip(shift).map(|(a, b)| a + b).collect::<Vec<_>>();
        match self {
            Region::Box { lo, hi } => Region::Box { lo: add(lo), hi: add(hi) },
            Region::HalfOpenBox { lo, hi } => Region::HalfOpenBox { lo: add(lo), hi: add(hi) },
            Region::Ball { center, radius } => Region::Ball { center: add(center), radius: *radius },
        }
    }

    /// Whether the closed `margin`-neighbourhood of `inner` lies inside `self`.
    pub fn contains_neighbourhood(&self, inner: &Region, margin: f64) -> bool {
        let (ilo, ihi) = inner.bounding_box();
        match self {
            Region::Box { lo, hi } | Region::HalfOpenBox { lo, hi } => {
                let strict = matches!(self, Region::HalfOpenBox { .. });
                ilo.iter().zip(lo).all(|(i, o)| i - margin >= *o)
                    && ihi.iter().zip(hi).all(|(i, o)| if strict { i + margin < *o } else { i + margin <= *o })
            }
            Region::Ball { center, radius } => match inner {
                Region::Ball { center: c2, radius: r2 } => {
                    let d = center.iter().zip(c2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    d + r2 + margin <= *radius
                }
                _ => {
                    // farthest corner of the inner box
                    let far = center
                        .iter()
                        .zip(ilo.iter().zip(&ihi))
                        .map(|(c, (l, h))| {
                            let m = (c - l).abs().max((h - c).abs());
                            m * m
                        })
                        .sum::<f64>()
                        .sqrt();
                    far + margin <= *radius
                }
            },
        }
    }
}

/// Volume of the unit ball in ℝᵈ.
pub fn unit_ball_volume(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// A lattice point with its integer coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub coords: Vec<i64>,
    pub point: Vec<f64>,
}

/// Integer coordinate box `[cmin, cmax]` covering every lattice point in the
/// bounding box `[lo, hi]`, obtained from interval images under `B⁻¹`.
pub fn coordinate_search_box(basis: &LatticeBasis, lo: &[f64], hi: &[f64]) -> (Vec<i64>, Vec<i64>) {
    let d = basis.dim();
    let inv = basis.inverse_matrix();
    let mut cmin = vec![0i64; d];
    let mut cmax = vec![0i64; d];
    for i in 0..d {
        let (mut mn, mut mx) = (0.0, 0.0);
        for j in 0..d {
            let r = inv[(i, j)];
            let (a, b) = (r * lo[j], r * hi[j]);
            mn += a.min(b);
            mx += a.max(b);
        }
        let slack = 1e-9 * (1.0 + mn.abs().max(mx.abs()));
        cmin[i] = (mn - slack).floor() as i64;
        cmax[i] = (mx + slack).ceil() as i64;
    }
    (cmin, cmax)
}

/// All lattice points in `region`, in lexicographic order of integer coordinates.
///
/// The search covers the inverse-basis image of the region's bounding box; the
/// last coordinate is tightened row by row before exact membership filtering.
pub fn enumerate_points(basis: &LatticeBasis, region: &Region) -> Result<Vec<LatticePoint>> {
    if region.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: region.dim() });
    }
    if !region.is_bounded() {
        return Err(Error::UnboundedRegion);
    }
    if region.is_empty() {
        return Ok(Vec::new());
    }
    let (lo, hi) = region.bounding_box();
    let (cmin, cmax) = coordinate_search_box(basis, &lo, &hi);
    let d = basis.dim();

    let scan_outer = |c0: i64| -> Vec<LatticePoint> {
        let mut out = Vec::new();
        let mut coords = cmin.clone();
        coords[0] = c0;
        if d == 1 {
            let p = basis.point(&coords);
            if region.contains(&p) {
                out.push(LatticePoint { coords, point: p });
            }
            return out;
        }
        loop {
            // coords[1..d-1] set; scan last coordinate in its tightened range
            let mut partial = vec![0.0; d];
            for j in 0..d - 1 {
                let c = coords[j] as f64;
                for (i, p) in partial.iter_mut().enumerate() {
                    *p += basis.columns[(i, j)] * c;
                }
            }
            let (mut tlo, mut thi) = (cmin[d - 1] as f64, cmax[d - 1] as f64);
            for i in 0..d {
                let b = basis.columns[(i, d - 1)];
                if b.abs() < 1e-300 {
                    if partial[i] < lo[i] - 1e-9 || partial[i] > hi[i] + 1e-9 {
                        tlo = 1.0;
                        thi = 0.0;
                    }
                    continue;
                }
                let (a, c) = ((lo[i] - partial[i]) / b, (hi[i] - partial[i]) / b);
                tlo = tlo.max(a.min(c));
                thi = thi.min(a.max(c));
            }
            if tlo <= thi + 1e-9 {
                let slack = 1e-9 * (1.0 + tlo.abs().max(thi.abs()));
                let start = ((tlo - slack).floor() as i64).max(cmin[d - 1]);
                let end = ((thi + slack).ceil() as i64).min(cmax[d - 1]);
                for t in start..=end {
                    coords[d - 1] = t;
                    let p = basis.point(&coords);
                    if region.contains(&p) {
                        out.push(LatticePoint { coords: coords.clone(), point: p });
                    }
                }
            }
            // odometer over coordinates 1..d-1
            let mut k = d - 2;
            loop {
                if k == 0 {
                    return out;
                }
                if coords[k] < cmax[k] {
                    coords[k] += 1;
                    break;
                }
                coords[k] = cmin[k];
                k -= 1;
            }
        }
    };

    let outer: Vec<i64> = (cmin[0]..=cmax[0]).collect();
    let chunks: Vec<Vec<LatticePoint>> = if d == 1 {
        outer.iter().map(|&c| scan_outer(c)).collect()
    } else {
        outer.par_iter().map(|&c| scan_outer(c)).collect()
    };
    Ok(chunks.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn sqrt2_basis() -> LatticeBasis {
        LatticeBasis::from_columns(&[vec![1.0, 1.0], vec![SQRT_2, -SQRT_2]]).unwrap()
    }

    #[test]
    fn covolume_examples() {
        assert_eq!(LatticeBasis::identity(2).covolume(), 1.0);
        assert!((sqrt2_basis().covolume() - 2.0 * SQRT_2).abs() < 1e-12);
        let diag = LatticeBasis::from_columns(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((diag.covolume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_basis_is_rejected() {
        let err = LatticeBasis::from_columns(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateLattice { .. }));
    }

    #[test]
    fn dual_examples() {
        let id = LatticeBasis::identity(2).dual().unwrap();
        assert!((id.columns() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);

        let diag = LatticeBasis::from_columns(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap().dual().unwrap();
        assert!((diag.column(0)[0] - 0.5).abs() < 1e-15 && (diag.column(1)[1] - 2.0).abs() < 1e-15);

        let dual = sqrt2_basis().dual().unwrap();
        let u0 = dual.column(0);
        let u1 = dual.column(1);
        assert!((u0[0] - 0.5).abs() < 1e-12 && (u0[1] - 0.5).abs() < 1e-12);
        assert!((u1[0] - SQRT_2 / 4.0).abs() < 1e-12 && (u1[1] + SQRT_2 / 4.0).abs() < 1e-12);
        // ⟨u_i, v_j⟩ = δ_ij by direct multiplication
        let b = sqrt2_basis();
        for i in 0..2 {
            for j in 0..2 {
                let ip: f64 = dual.column(i).iter().zip(b.column(j)).map(|(x, y)| x * y).sum();
                assert!((ip - (i == j) as i32 as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_dual_and_membership() {
        let s = |a, b| QuadraticNumber::from_integers(a, b, 2);
        let exact = ExactMatrix::from_columns(vec![vec![s(1, 0), s(1, 0)], vec![s(0, 1), s(0, -1)]]).unwrap();
        let basis = LatticeBasis::from_exact(exact).unwrap();
        let dual = basis.dual().unwrap();
        let de = dual.exact().unwrap();
        assert_eq!(de.get(0, 0), QuadraticNumber::rational(Rational::new(1, 2)));
        assert_eq!(de.get(0, 1), QuadraticNumber::new(Rational::new(0, 1), Rational::new(1, 4), 2));
        // (3 + 2√2, 3 − 2√2) = γ(3, 2)
        let hit = basis.contains_exact(&[s(3, 2), s(3, -2)]).unwrap();
        assert_eq!(hit, Some(vec![3, 2]));
        let miss = basis.contains_exact(&[s(3, 2), s(3, 2)]).unwrap();
        assert_eq!(miss, None);
    }

    #[test]
    fn enumerate_small_cases() {
        let z2 = LatticeBasis::identity(2);
        let pts = enumerate_points(&z2, &Region::cube(2, 1.5)).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0].coords, vec![-1, -1]);
        assert_eq!(pts[8].coords, vec![1, 1]);
        let empty = Region::Box { lo: vec![0.2, 0.2], hi: vec![0.8, 0.8] };
        assert!(enumerate_points(&z2, &empty).unwrap().is_empty());
        let inverted = Region::Box { lo: vec![1.0, 1.0], hi: vec![0.0, 0.0] };
        assert!(enumerate_points(&z2, &inverted).unwrap().is_empty());
    }

    #[test]
    fn enumerate_matches_naive_loop() {
        let b = sqrt2_basis();
        let region = Region::cube(2, 3.0);
        let got: Vec<Vec<i64>> = enumerate_points(&b, &region).unwrap().into_iter().map(|p| p.coords).collect();
        let mut naive = Vec::new();
        for a in -10i64..=10 {
            for c in -10i64..=10 {
                let p = b.point(&[a, c]);
                if region.contains(&p) {
                    naive.push(vec![a, c]);
                }
            }
        }
        assert_eq!(got, naive);
    }

    #[test]
    fn unbounded_region_errors() {
        let z = LatticeBasis::identity(1);
        let r = Region::Box { lo: vec![0.0], hi: vec![f64::INFINITY] };
        assert_eq!(enumerate_points(&z, &r).unwrap_err(), Error::UnboundedRegion);
    }

    #[test]
    fn region_volumes() {
        assert!((Region::ball(vec![0.0, 0.0], 2.0).volume() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(Region::interval(0.0, 10.0).volume(), 10.0);
    }
}
