//! Cut-and-project schemes, windows and model sets.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::quadratic::QuadraticNumber;
use crate::lattice::{enumerate_points, ExactMatrix, LatticeBasis, Region};
use crate::quadrature::{jinc, sinc};

/// A lattice Γ in ℝⁿ × ℝᵐ; the first `n` coordinates are physical.
#[derive(Clone, Debug)]
pub struct Scheme {
    n: usize,
    m: usize,
    gamma: LatticeBasis,
}

impl Scheme {
    pub fn new(n: usize, m: usize, gamma: LatticeBasis) -> Result<Self> {
        if gamma.dim() != n + m {
            return Err(Error::DimensionMismatch { expected: n + m, got: gamma.dim() });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("physical dimension must be positive".into()));
        }
        Ok(Self { n, m, gamma })
    }

    /// The chain γ(a, b) = (a + b√2, a − b√2) in ℝ × ℝ.
    pub fn sqrt2_chain() -> Self {
        let q = |a, b| QuadraticNumber::from_integers(a, b, 2);
        let exact = ExactMatrix::from_columns(vec![vec![q(1, 0), q(1, 0)], vec![q(0, 1), q(0, -1)]]).expect("2x2");
        Self::new(1, 1, LatticeBasis::from_exact(exact).expect("nonsingular")).expect("dims")
    }

    /// Two copies of the √2-chain: physical ℝ², internal ℝ², coordinates
    /// ordered `(x₁, x₂, y₁, y₂)`. Invariant under D₄ acting diagonally.
    pub fn sqrt2_square() -> Self {
        let q = |a, b| QuadraticNumber::from_integers(a, b, 2);
        let z = q(0, 0);
        let exact = ExactMatrix::from_columns(vec![
            vec![q(1, 0), z, q(1, 0), z],
            vec![q(0, 1), z, q(0, -1), z],
            vec![z, q(1, 0), z, q(1, 0)],
            vec![z, q(0, 1), z, q(0, -1)],
        ])
        .expect("4x4");
        Self::new(2, 2, LatticeBasis::from_exact(exact).expect("nonsingular")).expect("dims")
    }

    /// ℤⁿ⁺ᵐ scaled by `scale` in every coordinate.
    pub fn scaled_integer(n: usize, m: usize, scale: f64) -> Result<Self> {
        let d = n + m;
        let cols: Vec<Vec<f64>> = (0..d).map(|j| (0..d).map(|i| if i == j { scale } else { 0.0 }).collect()).collect();
        Self::new(n, m, LatticeBasis::from_columns(&cols)?)
    }

    pub fn physical_dim(&self) -> usize {
        self.n
    }

    pub fn internal_dim(&self) -> usize {
        self.m
    }

    pub fn lattice(&self) -> &LatticeBasis {
        &self.gamma
    }

    pub fn covolume(&self) -> f64 {
        self.gamma.covolume()
    }

    pub fn dual(&self) -> Result<Scheme> {
        Scheme::new(self.n, self.m, self.gamma.dual()?)
    }

    pub fn physical<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[..self.n]
    }

    pub fn internal<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.n..]
    }

    /// Scheme with the basis replaced by `B·U` for unimodular `U`.
    pub fn recombined(&self, unimodular: &nalgebra::DMatrix<i64>) -> Result<Scheme> {
        Scheme::new(self.n, self.m, self.gamma.recombined(unimodular)?)
    }

    /// Smallest physical norm of a nonzero lattice point in `[−R, R]^{n+m}`.
    /// Values near zero indicate the projection is not injective.
    pub fn injectivity_diagnostic(&self, radius: f64) -> Result<InjectivityReport> {
        let pts = enumerate_points(&self.gamma, &Region::cube(self.n + self.m, radius))?;
        let mut min_norm = f64::INFINITY;
        for p in &pts {
            if p.coords.iter().all(|&c| c == 0) {
                continue;
            }
            let norm = self.physical(&p.point).iter().map(|v| v * v).sum::<f64>().sqrt();
            min_norm = min_norm.min(norm);
        }
        Ok(InjectivityReport { radius, min_physical_norm: min_norm, injective: min_norm > 1e-9 })
    }

    /// Checks that internal projections of points in `[−R, R]^{n+m}` come
    /// within `eps` of every grid point of the window's bounding box. Only
    /// warns on failure: density cannot be certified from finite data.
    pub fn dense_projection_diagnostic(&self, window: &Window, radius: f64, eps: Option<f64>) -> Result<DensityReport> {
        let eps = eps.unwrap_or(0.05 * window.diameter()).max(1e-12);
        let pts = enumerate_points(&self.gamma, &Region::cube(self.n + self.m, radius))?;
        let (lo, hi) = window.bounding_box();
        let m = self.m;
        if m == 0 || window.is_empty() {
            return Ok(DensityReport { eps, covered_fraction: 1.0, dense: true });
        }
        let cell = eps / (m as f64).sqrt();
        let counts: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (((h - l) / cell).ceil() as usize).max(1)).collect();
        let total: usize = counts.iter().product();
        let mut hit = vec![false; total];
        for p in &pts {
            let y = self.internal(&p.point);
            let mut idx = 0usize;
            let mut inside = true;
            for k in 0..m {
                let c = ((y[k] - lo[k]) / cell).floor();
                if c < 0.0 || c >= counts[k] as f64 {
                    inside = false;
                    break;
                }
                idx = idx * counts[k] + c as usize;
            }
            if inside {
                hit[idx] = true;
            }
        }
        let covered = hit.iter().filter(|&&h| h).count() as f64 / total as f64;
        let dense = covered == 1.0;
        if !dense {
            log::warn!("internal projections cover only {:.1}% of the window grid at radius {radius}", 100.0 * covered);
        }
        Ok(DensityReport { eps, covered_fraction: covered, dense })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InjectivityReport {
    pub radius: f64,
    pub min_physical_norm: f64,
    pub injective: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub eps: f64,
    pub covered_fraction: f64,
    pub dense: bool,
}

/// A compact window in internal space built from boxes and balls.
///
/// Boxes are lower-closed and upper-open so translated boxes tile exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Empty { dim: usize },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// Pairwise disjoint members.
    Union { parts: Vec<Window> },
    /// `outer \ inner`, with `inner ⊆ outer`.
    Difference { outer: std::boxed::Box<Window>, inner: std::boxed::Box<Window> },
}

impl Window {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Window::Box { lo: vec![lo], hi: vec![hi] }
    }

    pub fn cube(dim: usize, half_width: f64) -> Self {
        Window::Box { lo: vec![-half_width; dim], hi: vec![half_width; dim] }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Window::Ball { center, radius }
    }

    /// Checks the structural requirements: positive volume, disjoint unions,
    /// nested differences, balls in dimension ≤ 3.
    pub fn validate(&self) -> Result<()> {
        match self {
            Window::Empty { .. } => Ok(()),
            Window::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::InvalidWindow("box bounds have mismatched or zero length".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(h > l) || !l.is_finite() || !h.is_finite()) {
                    return Err(Error::InvalidWindow("box must have finite bounds with lo < hi".into()));
                }
                Ok(())
            }
            Window::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidWindow("ball radius must be positive".into()));
                }
                if center.is_empty() || center.len() > 3 {
                    return Err(Error::InvalidWindow("ball windows are supported in dimensions 1 to 3".into()));
                }
                Ok(())
            }
            Window::Union { parts } => {
                let d = self.dim();
                for p in parts {
                    p.validate()?;
                    if p.dim() != d {
                        return Err(Error::InvalidWindow("union members differ in dimension".into()));
                    }
                }
                for (i, a) in parts.iter().enumerate() {
                    for b in &parts[i + 1..] {
                        if !a.disjoint_from(b) {
                            return Err(Error::InvalidWindow("union members must be disjoint".into()));
                        }
                    }
                }
                Ok(())
            }
            Window::Difference { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if !outer.encloses(inner) {
                    return Err(Error::InvalidWindow("difference requires inner ⊆ outer".into()));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Empty { dim } => *dim,
            Window::Box { lo, .. } => lo.len(),
            Window::Ball { center, .. } => center.len(),
            Window::Union { parts } => parts.first().map_or(0, Window::dim),
            Window::Difference { outer, .. } => outer.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Window::Empty { .. } => true,
            Window::Union { parts } => parts.iter().all(Window::is_empty),
            _ => self.volume() <= 0.0,
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            Window::Empty { .. } => false,
            Window::Box { lo, hi } => y.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v < *h),
            Window::Ball { center, radius } => {
                y.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= radius * radius
            }
            Window::Union { parts } => parts.iter().any(|p| p.contains(y)),
            Window::Difference { outer, inner } => outer.contains(y) && !inner.contains(y),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Window::Empty { .. } => 0.0,
            Window::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| (h - l).max(0.0)).product(),
            Window::Ball { center, radius } => Region::ball(center.clone(), *radius).volume(),
            Window::Union { parts } => parts.iter().map(Window::volume).sum(),
            Window::Difference { outer, inner } => outer.volume() - inner.volume(),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Window::Empty { dim } => (vec![0.0; *dim], vec![0.0; *dim]),
            Window::Box { lo, hi } => (lo.clone(), hi.clone()),
            Window::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Window::Union { parts } => {
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for p in parts.iter().filter(|p| !p.is_empty()) {
                    let (l, h) = p.bounding_box();
                    for k in 0..d {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(h[k]);
                    }
                }
                if lo.iter().any(|v| v.is_infinite()) {
                    return (vec![0.0; d], vec![0.0; d]);
                }
                (lo, hi)
            }
            Window::Difference { outer, .. } => outer.bounding_box(),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt()
    }

    fn disjoint_from(&self, other: &Window) -> bool {
        match (self, other) {
            (Window::Ball { center: c1, radius: r1 }, Window::Ball { center: c2, radius: r2 }) => {
                let d = c1.iter().zip(c2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                d > r1 + r2
            }
            (Window::Box { .. }, Window::Box { .. }) => {
                let (l1, h1) = self.bounding_box();
                let (l2, h2) = other.bounding_box();
                // half-open boxes touching along a face are disjoint
                l1.iter().zip(&h1).zip(l2.iter().zip(&h2)).any(|((a, b), (c, d))| *b <= *c || *d <= *a)
            }
            _ => {
                let (l1, h1) = self.bounding_box();
                let (l2, h2) = other.bounding_box();
                l1.iter().zip(&h1).zip(l2.iter().zip(&h2)).any(|((a, b), (c, d))| *b < *c || *d < *a)
            }
        }
    }

    fn encloses(&self, inner: &Window) -> bool {
        let (il, ih) = inner.bounding_box();
        match self {
            Window::Box { lo, hi } => {
                il.iter().zip(lo).all(|(a, b)| a >= b) && ih.iter().zip(hi).all(|(a, b)| a <= b)
            }
            Window::Ball { center, radius } => match inner {
                Window::Ball { center: c2, radius: r2 } => {
                    let d = center.iter().zip(c2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    d + r2 <= *radius
                }
                _ => Region::ball(center.clone(), *radius)
                    .contains_neighbourhood(&Region::Box { lo: il, hi: ih }, 0.0),
            },
            Window::Union { parts } => parts.iter().any(|p| p.encloses(inner)),
            Window::Difference { .. } | Window::Empty { .. } => inner.is_empty(),
        }
    }

    /// `∫_W e^{−2πi⟨ξ,y⟩} dy` in closed form.
    pub fn fourier_transform(&self, xi: &[f64]) -> Complex64 {
        match self {
            Window::Empty { .. } => Complex64::new(0.0, 0.0),
            Window::Box { lo, hi } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for ((l, h), x) in lo.iter().zip(hi).zip(xi) {
                    let a = 0.5 * (h - l);
                    let c = 0.5 * (h + l);
                    let phase = Complex64::from_polar(1.0, -2.0 * PI * x * c);
                    acc *= phase * (2.0 * a * sinc(2.0 * PI * x * a));
                }
                acc
            }
            Window::Ball { center, radius } => {
                let r = *radius;
                let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let u = 2.0 * PI * r * norm;
                let phase = Complex64::from_polar(1.0, -2.0 * PI * xi.iter().zip(center).map(|(a, b)| a * b).sum::<f64>());
                let radial = match center.len() {
                    1 => 2.0 * r * sinc(u),
                    2 => PI * r * r * jinc(u),
                    _ => {
                        let f = if u < 1e-3 { 1.0 - u * u / 10.0 } else { 3.0 * (u.sin() - u * u.cos()) / (u * u * u) };
                        4.0 / 3.0 * PI * r * r * r * f
                    }
                };
                phase * radial
            }
            Window::Union { parts } => parts.iter().map(|p| p.fourier_transform(xi)).sum(),
            Window::Difference { outer, inner } => outer.fourier_transform(xi) - inner.fourier_transform(xi),
        }
    }
}

/// Which group law the physical coordinates carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Euclidean,
    /// Coordinates `(Re q, Im q, z)` with the Heisenberg product.
    Heisenberg,
}

/// A point of the model set together with its lattice preimage.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub coords: Vec<i64>,
    pub physical: Vec<f64>,
    pub internal: Vec<f64>,
}

/// The finite sample `{p_G(γ) : p_H(γ) ∈ W, p_G(γ) ∈ region}`.
#[derive(Clone, Debug)]
pub struct ModelSet {
    pub scheme: Scheme,
    pub window: Window,
    pub region: Region,
    pub geometry: Geometry,
    pub points: Vec<ModelPoint>,
}

impl ModelSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn physical_points(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.physical.clone()).collect()
    }

    /// CSV with integer coordinates, physical coordinates and internal coordinates.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let d = self.scheme.physical_dim() + self.scheme.internal_dim();
        let mut header: Vec<String> = (0..d).map(|i| format!("k{i}")).collect();
        header.extend((0..self.scheme.physical_dim()).map(|i| format!("x{i}")));
        header.extend((0..self.scheme.internal_dim()).map(|i| format!("y{i}")));
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            let mut row: Vec<String> = p.coords.iter().map(|c| c.to_string()).collect();
            row.extend(p.physical.iter().chain(&p.internal).map(|v| format!("{v:.16e}")));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Generates the model set inside a bounded physical region.
pub fn cut_and_project(scheme: &Scheme, window: &Window, region: &Region) -> Result<ModelSet> {
    if region.dim() != scheme.physical_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.physical_dim(), got: region.dim() });
    }
    if !region.is_bounded() {
        return Err(Error::UnboundedRegion);
    }
    let mut ms = ModelSet {
        scheme: scheme.clone(),
        window: window.clone(),
        region: region.clone(),
        geometry: Geometry::Euclidean,
        points: Vec::new(),
    };
    if window.is_empty() || region.is_empty() {
        return Ok(ms);
    }
    if window.dim() != scheme.internal_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.internal_dim(), got: window.dim() });
    }
    window.validate()?;
    let (plo, phi) = region.bounding_box();
    let (wlo, whi) = window.bounding_box();
    let search = Region::Box { lo: [plo, wlo].concat(), hi: [phi, whi].concat() };
    let n = scheme.physical_dim();
    ms.points = enumerate_points(scheme.lattice(), &search)?
        .into_iter()
        .filter(|p| region.contains(&p.point[..n]) && window.contains(&p.point[n..]))
        .map(|p| ModelPoint { physical: p.point[..n].to_vec(), internal: p.point[n..].to_vec(), coords: p.coords })
        .collect();
    Ok(ms)
}

/// Points per unit physical volume of the sampled region.
pub fn density(model_set: &ModelSet) -> Result<f64> {
    let v = model_set.region.volume();
    if !(v > 0.0) {
        return Err(Error::ZeroVolume);
    }
    Ok(model_set.len() as f64 / v)
}

/// Upper bound on the number of model-set points in a box with side
/// lengths `sides`: lattice points of the slab `box × bbox(W)` are bounded by
/// the volume of that slab enlarged by one fundamental parallelepiped.
pub fn count_bound(scheme: &Scheme, window: &Window, sides: &[f64]) -> f64 {
    let b = scheme.lattice().columns();
    let d = b.nrows();
    let (wlo, whi) = window.bounding_box();
    let lengths: Vec<f64> = sides.iter().copied().chain(wlo.iter().zip(&whi).map(|(l, h)| h - l)).collect();
    let vol: f64 = (0..d).map(|i| lengths[i] + (0..d).map(|j| b[(i, j)].abs()).sum::<f64>()).product();
    vol / scheme.covolume()
}

/// Minimum pairwise distance and maximum ball occupancy, balls centred at the points.
#[derive(Clone, Debug, PartialEq)]
pub struct FlcReport {
    pub min_distance: f64,
    pub max_count: usize,
}

/// Exact minimum gap and maximum `probe_radius`-ball occupancy.
pub fn flc_report(model_set: &ModelSet, probe_radius: f64) -> FlcReport {
    flc_report_points(&model_set.physical_points(), probe_radius)
}

pub fn flc_report_points(points: &[Vec<f64>], probe_radius: f64) -> FlcReport {
    let mut pts: Vec<&Vec<f64>> = points.iter().collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut min_distance = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[j][0] - pts[i][0] >= min_distance {
                break;
            }
            min_distance = min_distance.min(dist(pts[i], pts[j]));
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
    let mut max_count = 0;
    for p in &pts {
        let start = xs.partition_point(|&x| x < p[0] - probe_radius);
        let end = xs.partition_point(|&x| x <= p[0] + probe_radius);
        let c = pts[start..end].iter().filter(|q| dist(p, q) <= probe_radius).count();
        max_count = max_count.max(c);
    }
    FlcReport { min_distance, max_count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    const SQRT2_CHAIN_DENSITY: f64 = 2.0 / (2.0 * SQRT_2);

    #[test]
    fn integer_scheme_picks_zero_internal() {
        let s = Scheme::scaled_integer(1, 1, 1.0).unwrap();
        let ms = cut_and_project(&s, &Window::interval(-0.4, 0.4), &Region::interval(0.0, 5.0)).unwrap();
        let xs: Vec<f64> = ms.points.iter().map(|p| p.physical[0]).collect();
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn sqrt2_chain_matches_naive_loop() {
        let s = Scheme::sqrt2_chain();
        let ms = cut_and_project(&s, &Window::interval(-1.0, 1.0), &Region::interval(0.0, 10.0)).unwrap();
        let mut naive = Vec::new();
        for a in -20i64..=20 {
            for b in -20i64..=20 {
                let x = a as f64 + b as f64 * SQRT_2;
                let y = a as f64 - b as f64 * SQRT_2;
                if (-1.0..1.0).contains(&y) && (0.0..=10.0).contains(&x) {
                    naive.push((a, b));
                }
            }
        }
        let got: Vec<(i64, i64)> = ms.points.iter().map(|p| (p.coords[0], p.coords[1])).collect();
        assert_eq!(got, naive);
    }

    #[test]
    fn empty_window_gives_empty_set() {
        let s = Scheme::sqrt2_chain();
        let ms = cut_and_project(&s, &Window::Empty { dim: 1 }, &Region::interval(0.0, 10.0)).unwrap();
        assert!(ms.is_empty());
        assert_eq!(density(&ms).unwrap(), 0.0);
    }

    #[test]
    fn densities() {
        let z = Scheme::scaled_integer(1, 1, 1.0).unwrap();
        let ms = cut_and_project(&z, &Window::interval(-0.5, 0.5), &Region::interval(0.0, 1e4)).unwrap();
        assert!((density(&ms).unwrap() - 1.0).abs() < 1e-3);
        let s = Scheme::sqrt2_chain();
        let ms = cut_and_project(&s, &Window::interval(-1.0, 1.0), &Region::interval(-1e4, 1e4)).unwrap();
        assert!((density(&ms).unwrap() - SQRT2_CHAIN_DENSITY).abs() < 5e-4);
        let zero = ModelSet { region: Region::interval(1.0, 1.0), ..ms };
        assert_eq!(density(&zero).unwrap_err(), Error::ZeroVolume);
    }

    #[test]
    fn flc_examples() {
        let z: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        assert_eq!(flc_report_points(&z, 1.5), FlcReport { min_distance: 1.0, max_count: 3 });
        let z2: Vec<Vec<f64>> = (0..20).map(|i| vec![2.0 * i as f64]).collect();
        assert_eq!(flc_report_points(&z2, 1.5), FlcReport { min_distance: 2.0, max_count: 1 });
    }

    #[test]
    fn flc_min_gap_matches_pair_scan() {
        let s = Scheme::sqrt2_chain();
        let ms = cut_and_project(&s, &Window::interval(-1.0, 1.0), &Region::interval(0.0, 500.0)).unwrap();
        let pts = ms.physical_points();
        let mut brute = f64::INFINITY;
        for i in 0..pts.len() {
            for j in 0..i {
                brute = brute.min((pts[i][0] - pts[j][0]).abs());
            }
        }
        assert_eq!(flc_report(&ms, 1.0).min_distance, brute);
    }

    #[test]
    fn window_fourier_transform_closed_forms() {
        let w = Window::interval(-1.0, 1.0);
        let xi = -SQRT_2 / 4.0;
        let expect = (2.0 * PI * xi).sin() / (PI * xi);
        assert!((w.fourier_transform(&[xi]).re - expect).abs() < 1e-14);
        assert!((expect - 0.716_375_572_026_488).abs() < 1e-12);
        assert!((w.fourier_transform(&[0.5])).norm() < 1e-15);
        let disk = Window::ball(vec![0.0, 0.0], 1.0);
        assert!((disk.fourier_transform(&[0.0, 0.0]).re - PI).abs() < 1e-12);
    }

    #[test]
    fn window_validation() {
        assert!(Window::interval(1.0, 0.0).validate().is_err());
        let touching = Window::Union { parts: vec![Window::interval(0.0, 1.0), Window::interval(1.0, 2.0)] };
        assert!(touching.validate().is_ok());
        assert!((touching.volume() - 2.0).abs() < 1e-15);
        let overlap = Window::Union { parts: vec![Window::interval(0.0, 1.0), Window::interval(0.5, 2.0)] };
        assert!(overlap.validate().is_err());
        let hole = Window::Difference {
            outer: Box::new(Window::interval(-1.0, 1.0)),
            inner: Box::new(Window::interval(-0.25, 0.25)),
        };
        assert!(hole.validate().is_ok());
        assert!(!hole.contains(&[0.0]) && hole.contains(&[0.5]));
        assert!((hole.volume() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn count_bound_holds_on_sample_boxes() {
        let s = Scheme::sqrt2_chain();
        let w = Window::interval(-1.0, 1.0);
        for start in [-50.0, 0.0, 13.7] {
            for len in [0.5, 3.0, 40.0] {
                let ms = cut_and_project(&s, &w, &Region::interval(start, start + len)).unwrap();
                assert!(ms.len() as f64 <= count_bound(&s, &w, &[len]));
            }
        }
    }

    #[test]
    fn diagnostics_on_sqrt2_chain() {
        let s = Scheme::sqrt2_chain();
        let inj = s.injectivity_diagnostic(10.0).unwrap();
        assert!(inj.injective);
        let dense = s.dense_projection_diagnostic(&Window::interval(-1.0, 1.0), 50.0, None).unwrap();
        assert!(dense.dense);
        let z = Scheme::scaled_integer(1, 1, 1.0).unwrap();
        let dz = z.dense_projection_diagnostic(&Window::interval(-1.0, 1.0), 20.0, None).unwrap();
        assert!(!dz.dense);
    }
}
