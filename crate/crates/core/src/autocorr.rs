//! Empirical autocorrelation by window averaging, window-overlap coefficients,
//! radialization over a point group, and approximation-sequence diagnostics.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{PointGroup, TestFunction};
use crate::lattice::Region;
use crate::quadrature::{jinc, sinc};
use crate::scheme::{Geometry, ModelSet, Scheme, Window};

/// One atom `c(z) δ_z` of the autocorrelation.
#[derive(Clone, Debug, PartialEq)]
pub struct AutocorrAtom {
    /// Exact lattice coordinates of the difference.
    pub key: Vec<i64>,
    /// Physical difference vector (`x⁻¹y` in the Heisenberg case).
    pub z: Vec<f64>,
    pub coeff: f64,
}

/// Atoms merged over point-group orbits.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialAtom {
    /// Lexicographically minimal orbit element, or the invariants `(|q|, z)`
    /// in the Heisenberg case.
    pub label: Vec<f64>,
    pub multiplicity: usize,
    pub coeff: f64,
}

/// The autocorrelation restricted to the ball of radius `cutoff`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalAutocorrelation {
    pub cutoff: f64,
    pub volume: f64,
    pub geometry: Geometry,
    /// Sorted by key.
    pub atoms: Vec<AutocorrAtom>,
    pub radial: Option<Vec<RadialAtom>>,
}

impl EmpiricalAutocorrelation {
    pub fn coefficient(&self, key: &[i64]) -> f64 {
        self.atoms
            .binary_search_by(|a| a.key.as_slice().cmp(key))
            .map(|i| self.atoms[i].coeff)
            .unwrap_or(0.0)
    }

    /// Coefficient at the identity.
    pub fn identity_coefficient(&self) -> f64 {
        self.atoms.iter().find(|a| a.key.iter().all(|&k| k == 0)).map_or(0.0, |a| a.coeff)
    }

    /// `max_z |c(z) − c(−z)|` in the Euclidean case.
    pub fn symmetry_defect(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let neg: Vec<i64> = a.key.iter().map(|k| -k).collect();
                (a.coeff - self.coefficient(&neg)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV rows `(key…, z…, label…, coefficient)`; the label is the
    /// K-orbit representative of `z` when `k` is given.
    pub fn write_csv(&self, k: Option<&PointGroup>, mut out: impl Write) -> std::io::Result<()> {
        let (nk, nz) = self.atoms.first().map_or((0, 0), |a| (a.key.len(), a.z.len()));
        let mut header: Vec<String> = (0..nk).map(|i| format!("k{i}")).collect();
        header.extend((0..nz).map(|i| format!("z{i}")));
        if k.is_some() {
            header.extend((0..nz).map(|i| format!("orbit{i}")));
        }
        header.push("coefficient".into());
        writeln!(out, "{}", header.join(","))?;
        for a in &self.atoms {
            let mut row: Vec<String> = a.key.iter().map(|v| v.to_string()).collect();
            row.extend(a.z.iter().map(|v| format!("{v:.16e}")));
            if let Some(k) = k {
                row.extend(k.representative(&a.z).iter().map(|v| format!("{v:.16e}")));
            }
            row.push(format!("{:.16e}", a.coeff));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Uniform grid over point indices for radius queries.
pub(crate) struct NeighbourGrid {
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl NeighbourGrid {
    pub(crate) fn new(points: &[Vec<f64>], cell: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(i);
        }
        Self { cell, cells }
    }

    fn key(p: &[f64], cell: f64) -> Vec<i64> {
        p.iter().map(|v| (v / cell).floor() as i64).collect()
    }

    /// Indices of points in the box `[lo, hi]` (superset, unfiltered).
    pub(crate) fn candidates(&self, lo: &[f64], hi: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let a = Self::key(lo, self.cell);
        let b = Self::key(hi, self.cell);
        let d = a.len();
        let mut cur = a.clone();
        loop {
            if let Some(v) = self.cells.get(&cur) {
                out.extend_from_slice(v);
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < b[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = a[k];
            }
        }
    }
}

/// `(1/vol F_t) Σ_{x ∈ P ∩ F_t} Σ_{y ∈ P, |y − x| ≤ R} δ_{y − x}`.
///
/// The inner sum runs over the whole sample, so the sample region must
/// contain the closed `R`-neighbourhood of `F_t`.
pub fn empirical_autocorr(model_set: &ModelSet, f_t: &Region, cutoff: f64) -> Result<EmpiricalAutocorrelation> {
    if model_set.geometry == Geometry::Heisenberg {
        return crate::heisenberg::h_empirical_autocorr(model_set, f_t, cutoff);
    }
    let volume = f_t.volume();
    if !(volume > 0.0) {
        return Err(Error::ZeroVolume);
    }
    if !model_set.region.contains_neighbourhood(f_t, cutoff) {
        return Err(Error::InsufficientMargin { margin: cutoff });
    }
    let basis = model_set.scheme.lattice();
    let n = model_set.scheme.physical_dim();
    let pts = model_set.physical_points();
    let grid = NeighbourGrid::new(&pts, cutoff.max(1e-9));
    let r2 = cutoff * cutoff;
    let counts: BTreeMap<Vec<i64>, u64> = model_set
        .points
        .par_iter()
        .filter(|x| f_t.contains(&x.physical))
        .fold(
            || (HashMap::<Vec<i64>, u64>::new(), Vec::new()),
            |(mut map, mut buf), x| {
                let lo: Vec<f64> = x.physical.iter().map(|v| v - cutoff).collect();
                let hi: Vec<f64> = x.physical.iter().map(|v| v + cutoff).collect();
                grid.candidates(&lo, &hi, &mut buf);
                for &j in &buf {
                    let y = &model_set.points[j];
                    let d2: f64 = y.physical.iter().zip(&x.physical).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 <= r2 {
                        let key: Vec<i64> = y.coords.iter().zip(&x.coords).map(|(a, b)| a - b).collect();
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
        })
        .into_iter()
        .collect();
    let atoms = counts
        .into_iter()
        .map(|(key, c)| {
            let z = basis.point(&key)[..n].to_vec();
            AutocorrAtom { key, z, coeff: c as f64 / volume }
        })
        .collect();
    Ok(EmpiricalAutocorrelation { cutoff, volume, geometry: Geometry::Euclidean, atoms, radial: None })
}

/// Window-overlap volume together with a Monte Carlo standard error (zero
/// when a closed form was used).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    pub value: f64,
    pub stderr: f64,
}

/// `vol(W ∩ (W − s))`.
pub fn window_overlap(window: &Window, shift: &[f64]) -> Overlap {
    if let Some(v) = overlap_closed(window, window, shift) {
        return Overlap { value: v.max(0.0), stderr: 0.0 };
    }
    overlap_monte_carlo(window, shift, 1_000_000, 0x0e7)
}

// vol(A ∩ (B − s))
fn overlap_closed(a: &Window, b: &Window, s: &[f64]) -> Option<f64> {
    match (a, b) {
        (Window::Empty { .. }, _) | (_, Window::Empty { .. }) => Some(0.0),
        (Window::Box { lo: l1, hi: h1 }, Window::Box { lo: l2, hi: h2 }) => Some(
            (0..l1.len())
                .map(|i| (h1[i].min(h2[i] - s[i]) - l1[i].max(l2[i] - s[i])).max(0.0))
                .product(),
        ),
        (Window::Ball { center: c1, radius: r1 }, Window::Ball { center: c2, radius: r2 }) => {
            let d = c1.iter().zip(c2).zip(s).map(|((x, y), t)| (y - t - x).powi(2)).sum::<f64>().sqrt();
            ball_intersection(c1.len(), *r1, *r2, d)
        }
        (Window::Union { parts }, _) => parts.iter().map(|p| overlap_closed(p, b, s)).sum(),
        (_, Window::Union { parts }) => parts.iter().map(|p| overlap_closed(a, p, s)).sum(),
        (Window::Difference { outer, inner }, _) => {
            Some(overlap_closed(outer, b, s)? - overlap_closed(inner, b, s)?)
        }
        (_, Window::Difference { outer, inner }) => {
            Some(overlap_closed(a, outer, s)? - overlap_closed(a, inner, s)?)
        }
        _ => None,
    }
}

fn ball_intersection(dim: usize, r1: f64, r2: f64, d: f64) -> Option<f64> {
    let vol = |r: f64| Region::ball(vec![0.0; dim], r).volume();
    if d >= r1 + r2 {
        return Some(0.0);
    }
    if d <= (r1 - r2).abs() {
        return Some(vol(r1.min(r2)));
    }
    match dim {
        1 => Some(r1 + r2 - d),
        2 => {
            let a1 = r1 * r1 * ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos();
            let a2 = r2 * r2 * ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos();
            let k = 0.5 * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).sqrt();
            Some(a1 + a2 - k)
        }
        3 => Some(
            PI * (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * r2 - 3.0 * r2 * r2 + 2.0 * d * r1 + 6.0 * r1 * r2 - 3.0 * r1 * r1)
                / (12.0 * d),
        ),
        _ => None,
    }
}

/// Monte Carlo estimate of `vol(W ∩ (W − s))` over the bounding box of `W`.
pub fn overlap_monte_carlo(window: &Window, shift: &[f64], samples: usize, seed: u64) -> Overlap {
    let (lo, hi) = window.bounding_box();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    if window.is_empty() || box_vol <= 0.0 {
        return Overlap { value: 0.0, stderr: 0.0 };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let mut y = vec![0.0; lo.len()];
    let mut ys = vec![0.0; lo.len()];
    for _ in 0..samples {
        for k in 0..lo.len() {
            y[k] = rng.random_range(lo[k]..hi[k]);
            ys[k] = y[k] + shift[k];
        }
        if window.contains(&y) && window.contains(&ys) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Overlap { value: box_vol * p, stderr: box_vol * (p * (1.0 - p) / samples as f64).sqrt() }
}

/// `c(z) = vol(W ∩ (W − z*)) / covol(Γ)` for the lattice point with integer
/// coordinates `coords`, `z*` being its internal part.
pub fn theoretical_autocorr_coeff(scheme: &Scheme, window: &Window, coords: &[i64]) -> Overlap {
    let p = scheme.lattice().point(coords);
    let o = window_overlap(window, scheme.internal(&p));
    let c = scheme.covolume();
    Overlap { value: o.value / c, stderr: o.stderr / c }
}

/// Merges atoms over K-orbits of their physical difference vectors.
pub fn radialize(ac: &EmpiricalAutocorrelation, k: &PointGroup) -> EmpiricalAutocorrelation {
    let mut groups: BTreeMap<Vec<i64>, RadialAtom> = BTreeMap::new();
    for a in &ac.atoms {
        let label = k.representative(&a.z);
        let key: Vec<i64> = label.iter().map(|v| (v * 1e9).round() as i64).collect();
        let e = groups.entry(key).or_insert(RadialAtom { label, multiplicity: 0, coeff: 0.0 });
        e.multiplicity += 1;
        e.coeff += a.coeff;
    }
    let mut out = ac.clone();
    out.radial = Some(groups.into_values().collect());
    out
}

fn check_support(ac: &EmpiricalAutocorrelation, f: &TestFunction) -> Result<()> {
    let support = f.support_radius();
    if support > ac.cutoff * (1.0 + 1e-12) {
        return Err(Error::SupportExceedsCutoff { support, cutoff: ac.cutoff });
    }
    Ok(())
}

/// `Σ_z c(z) f(z)`; requires `supp f` within the cutoff ball.
pub fn pair_against_test_function(ac: &EmpiricalAutocorrelation, f: &TestFunction) -> Result<Complex64> {
    check_support(ac, f)?;
    Ok(ac.atoms.par_iter().map(|a| f.eval(&a.z) * a.coeff).sum())
}

/// `Σ_orbits c(orbit) f(label)` for a K-invariant `f`.
pub fn pair_radial(ac: &EmpiricalAutocorrelation, f: &TestFunction) -> Result<Complex64> {
    check_support(ac, f)?;
    let radial = ac.radial.as_ref().ok_or_else(|| Error::InvalidParameter("autocorrelation is not radialized".into()))?;
    Ok(radial.iter().map(|a| f.eval(&a.label) * a.coeff).sum())
}

/// Largest `t·|c_t(z) − c_{t'}(z)|` over atoms: a fitted constant `C` in the
/// `C/t` stability estimate.
pub fn stability_constant(a: &EmpiricalAutocorrelation, b: &EmpiricalAutocorrelation, t: f64) -> f64 {
    let mut keys: Vec<&Vec<i64>> = a.atoms.iter().map(|x| &x.key).chain(b.atoms.iter().map(|x| &x.key)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().map(|k| t * (a.coefficient(k) - b.coefficient(k)).abs()).fold(0.0, f64::max)
}

/// Averaging family for the approximation theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `F_t = [−t, t]ⁿ`.
    Boxes,
    /// `F_t = B(0, t)`.
    Balls,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxSequence {
    pub family: Family,
    pub scales: Vec<f64>,
}

impl ApproxSequence {
    pub fn new(family: Family, scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.windows(2).any(|w| !(w[1] > w[0])) || scales[0] <= 0.0 {
            return Err(Error::InvalidParameter("scales must be positive and strictly increasing".into()));
        }
        Ok(Self { family, scales })
    }

    pub fn region(&self, dim: usize, t: f64) -> Region {
        match self.family {
            Family::Boxes => Region::cube(dim, t),
            Family::Balls => Region::ball(vec![0.0; dim], t),
        }
    }
}

/// `|β̂_t(ξ)|` for each scale, where `β_t` is the normalized indicator of `F_t`.
pub fn approx_sequence_diagnostic(seq: &ApproxSequence, xi: &[f64]) -> Result<Vec<f64>> {
    if xi.iter().all(|v| *v == 0.0) {
        return Err(Error::TrivialCharacter);
    }
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    seq.scales
        .iter()
        .map(|&t| match seq.family {
            Family::Boxes => Ok(xi.iter().map(|x| sinc(2.0 * PI * x * t)).product::<f64>().abs()),
            Family::Balls => {
                let u = 2.0 * PI * norm * t;
                match xi.len() {
                    1 => Ok(sinc(u).abs()),
                    2 => Ok(jinc(u).abs()),
                    3 => Ok(if u < 1e-3 { 1.0 } else { (3.0 * (u.sin() - u * u.cos()) / u.powi(3)).abs() }),
                    d => Err(Error::InvalidParameter(format!("ball families are supported in dimensions 1 to 3, got {d}"))),
                }
            }
        })
        .collect()
}
