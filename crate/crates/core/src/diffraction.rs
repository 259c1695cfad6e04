//! Theoretical pure-point diffraction of Euclidean and virtually abelian model
//! sets, and the identities used to cross-check it.
//!
//! Normalization: Poisson summation is used in the form
//! `Σ_Γ F(γ) = covol(Γ)⁻¹ Σ_{Γ^⊥} F̂(ξ)`, and the intensity of the atom at a
//! K-orbit `[ξ₁]` is `covol(Γ)⁻² Σ_{ξ₂ ∈ (Kξ₁)^{(2)}} |χ̂_W(ξ₂)|²`, so the
//! trivial atom carries `density²`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::autocorr::{empirical_autocorr, pair_against_test_function, pair_radial, radialize};
use crate::error::{Error, Result};
use crate::harmonic::{orbit_average_ft, spherical_ft, weighted_norm, PointGroup, SphericalLabel, TestFunction, WeightedNormParams};
use crate::lattice::{enumerate_points, LatticeBasis, Region};
use crate::scheme::{ModelSet, Scheme, Window};

/// Dual points whose physical part matches a target to this tolerance are
/// identified with it.
pub const PEAK_TOLERANCE: f64 = 1e-6;

const PARTNER_SEARCH_RADIUS: f64 = 32.0;

/// One atom of a pure-point diffraction measure.
#[derive(Clone, Debug, Serialize)]
pub struct DiffractionAtom {
    pub label: SphericalLabel,
    /// `(ξ₁, ξ₂)` pairs of `Γ^⊥` contributing to the atom.
    pub members: Vec<(Vec<f64>, Vec<f64>)>,
    /// Integer coordinates of the members in the dual basis.
    pub dual_coords: Vec<Vec<i64>>,
    pub intensity: f64,
}

impl DiffractionAtom {
    pub fn xi1(&self) -> &[f64] {
        match &self.label {
            SphericalLabel::Bessel { xi1 } => xi1,
            SphericalLabel::Nilpotent { .. } => &[],
        }
    }

    fn max_norm(&self) -> f64 {
        self.members
            .iter()
            .map(|(a, b)| a.iter().chain(b).map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// A truncated pure-point measure, atoms sorted by `|ξ₁|` then lexicographically.
#[derive(Clone, Debug, Serialize)]
pub struct PurePointMeasure {
    pub atoms: Vec<DiffractionAtom>,
    /// Dual points `(ξ₁, ξ₂)` were enumerated in the Euclidean ball of this
    /// radius in the full dual space.
    pub dual_radius: f64,
    /// Total intensity of atoms in the outer shell `R/2 < |ξ| ≤ R`, a rough
    /// gauge of what the truncation leaves out.
    pub tail_estimate: f64,
    pub covolume: f64,
}

impl PurePointMeasure {
    pub fn trivial_intensity(&self) -> f64 {
        self.atoms.iter().find(|a| a.label.is_trivial()).map_or(0.0, |a| a.intensity)
    }

    /// Intensity of the atom whose representative is within [`PEAK_TOLERANCE`]
    /// of `xi1` (zero when there is none).
    pub fn intensity_at(&self, k: &PointGroup, xi1: &[f64]) -> f64 {
        let rep = k.representative(xi1);
        self.atoms
            .iter()
            .find(|a| a.xi1().iter().zip(&rep).all(|(x, y)| (x - y).abs() <= PEAK_TOLERANCE))
            .map_or(0.0, |a| a.intensity)
    }

    /// Peak report: `branch,xi1_0,…,intensity,tail_bound`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let n = self.atoms.first().map_or(0, |a| a.xi1().len());
        let cols: Vec<String> = (0..n).map(|i| format!("xi1_{i}")).collect();
        writeln!(out, "branch,{},orbit_size,intensity,tail_bound", cols.join(","))?;
        for a in &self.atoms {
            let xs: Vec<String> = a.xi1().iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "bessel,{},{},{:.16e},{:.16e}", xs.join(","), a.members.len(), a.intensity, self.tail_estimate)?;
        }
        Ok(())
    }
}

fn key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e9).round() as i64).collect()
}

fn check_point_group(scheme: &Scheme, k: &PointGroup) -> Result<()> {
    if k.dim() != scheme.physical_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.physical_dim(), got: k.dim() });
    }
    Ok(())
}

/// Dual points whose physical part is `xi1`.
fn partners(dual: &LatticeBasis, n: usize, xi1: &[f64], radius: f64) -> Result<Vec<(Vec<i64>, Vec<f64>)>> {
    let d = dual.dim();
    let mut lo = vec![-radius; d];
    let mut hi = vec![radius; d];
    for i in 0..n {
        lo[i] = xi1[i] - 1e-7;
        hi[i] = xi1[i] + 1e-7;
    }
    Ok(enumerate_points(dual, &Region::Box { lo, hi })?
        .into_iter()
        .filter(|p| p.point[..n].iter().zip(xi1).all(|(a, b)| (a - b).abs() <= 1e-9))
        .map(|p| (p.coords, p.point[n..].to_vec()))
        .collect())
}

/// Function whose shadow transform is requested.
#[derive(Clone, Debug)]
pub enum ShadowInput {
    Window(Window),
    Function(TestFunction),
}

impl ShadowInput {
    fn fourier_transform(&self, xi: &[f64]) -> Complex64 {
        match self {
            ShadowInput::Window(w) => w.fourier_transform(xi),
            ShadowInput::Function(f) => f.fourier_transform(xi),
        }
    }
}

/// Shadow transform at an orbit.
#[derive(Clone, Debug, Serialize)]
pub struct ShadowValue {
    pub label: SphericalLabel,
    /// `Σ_{ξ₂ ∈ (Kξ₁)^{(2)}} |r̂(ξ₂)|²`.
    pub value: f64,
    pub partners: Vec<Vec<f64>>,
}

pub fn shadow_transform_va(scheme: &Scheme, k: &PointGroup, r: &ShadowInput, xi1: &[f64]) -> Result<ShadowValue> {
    shadow_transform_va_with(scheme, k, r, xi1, PARTNER_SEARCH_RADIUS)
}

/// [`shadow_transform_va`] with an explicit search radius for the partners `ξ₂`.
pub fn shadow_transform_va_with(scheme: &Scheme, k: &PointGroup, r: &ShadowInput, xi1: &[f64], radius: f64) -> Result<ShadowValue> {
    check_point_group(scheme, k)?;
    let dual = scheme.lattice().dual()?;
    let n = scheme.physical_dim();
    let mut found = Vec::new();
    for point in k.orbit(xi1) {
        for (_, xi2) in partners(&dual, n, &point, radius)? {
            found.push(xi2);
        }
    }
    if found.is_empty() {
        return Err(Error::LabelNotInSpectrum(format!("{xi1:?} is not the physical part of a dual lattice point within radius {radius}")));
    }
    let value = found.iter().map(|x| r.fourier_transform(x).norm_sqr()).sum();
    Ok(ShadowValue { label: SphericalLabel::bessel(k, xi1), value, partners: found })
}

/// Spherical diffraction of the model set `(scheme, window)` for the Gelfand
/// pair `(ℝⁿ ⋊ K, K)`: one atom per K-orbit of physical dual parts.
pub fn spherical_diffraction(scheme: &Scheme, k: &PointGroup, window: &Window, dual_radius: f64) -> Result<PurePointMeasure> {
    check_point_group(scheme, k)?;
    if window.dim() != scheme.internal_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.internal_dim(), got: window.dim() });
    }
    let n = scheme.physical_dim();
    let d = n + scheme.internal_dim();
    let dual = scheme.lattice().dual()?;
    let covol = scheme.covolume();
    let points = enumerate_points(&dual, &Region::ball(vec![0.0; d], dual_radius))?;
    let mut groups: BTreeMap<Vec<i64>, (Vec<f64>, Vec<(Vec<i64>, Vec<f64>, Vec<f64>)>)> = BTreeMap::new();
    for p in points {
        let xi1 = p.point[..n].to_vec();
        let rep = k.representative(&xi1);
        groups.entry(key(&rep)).or_insert_with(|| (rep, Vec::new())).1.push((p.coords, xi1, p.point[n..].to_vec()));
    }
    let mut atoms: Vec<DiffractionAtom> = groups
        .into_par_iter()
        .map(|(_, (rep, mut members))| -> Result<DiffractionAtom> {
            // complete orbits whose partners fall outside the ball
            for point in k.orbit(&rep) {
                if members.iter().any(|m| key(&m.1) == key(&point)) {
                    continue;
                }
                let r1: f64 = point.iter().map(|v| v * v).sum();
                for (c, xi2) in partners(&dual, n, &point, dual_radius)? {
                    if r1 + xi2.iter().map(|v| v * v).sum::<f64>() <= dual_radius * dual_radius * (1.0 + 1e-9) {
                        members.push((c, point.clone(), xi2));
                    }
                }
            }
            let s: f64 = members.iter().map(|m| window.fourier_transform(&m.2).norm_sqr()).sum();
            Ok(DiffractionAtom {
                label: SphericalLabel::Bessel { xi1: rep },
                dual_coords: members.iter().map(|m| m.0.clone()).collect(),
                members: members.into_iter().map(|m| (m.1, m.2)).collect(),
                intensity: s / (covol * covol),
            })
        })
        .collect::<Result<_>>()?;
    atoms.sort_by(|a, b| {
        let na: f64 = a.xi1().iter().map(|v| v * v).sum();
        let nb: f64 = b.xi1().iter().map(|v| v * v).sum();
        na.total_cmp(&nb).then_with(|| key(a.xi1()).cmp(&key(b.xi1())))
    });
    let tail_estimate = atoms.iter().filter(|a| a.max_norm() > 0.5 * dual_radius).map(|a| a.intensity).sum();
    Ok(PurePointMeasure { atoms, dual_radius, tail_estimate, covolume: covol })
}

/// Meyer's formula: [`spherical_diffraction`] with trivial K.
pub fn meyer_diffraction(scheme: &Scheme, window: &Window, dual_radius: f64) -> Result<PurePointMeasure> {
    spherical_diffraction(scheme, &PointGroup::trivial(scheme.physical_dim()), window, dual_radius)
}

/// The three evaluations of `‖P_Γ(f ⊗ r)‖²`.
#[derive(Clone, Debug, Serialize)]
pub struct TripleReport {
    /// `Σ_Γ (f*∗f)(γ₁)(r*∗r)(γ₂)`.
    pub lhs_lattice: f64,
    /// `covol⁻¹ Σ_{Γ^⊥} |f̂(ξ₁)|²|r̂(ξ₂)|²`.
    pub rhs_dual: f64,
    /// `∫_{FD} |P_Γ(f ⊗ r)|²`.
    pub mid_quadrature: f64,
    pub max_rel_err: f64,
    pub dual_tail: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn check_dims(scheme: &Scheme, f: &TestFunction, r: &TestFunction) -> Result<()> {
    if f.dim() != scheme.physical_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.physical_dim(), got: f.dim() });
    }
    if r.dim() != scheme.internal_dim() {
        return Err(Error::DimensionMismatch { expected: scheme.internal_dim(), got: r.dim() });
    }
    Ok(())
}

/// `Σ_Γ (f*∗f)(γ₁)(r*∗r)(γ₂)`.
pub fn lattice_side(scheme: &Scheme, f: &TestFunction, r: &TestFunction) -> Result<f64> {
    check_dims(scheme, f, r)?;
    if f.is_zero() || r.is_zero() {
        return Ok(0.0);
    }
    let (af, ar) = (f.autocorrelation(), r.autocorrelation());
    let n = scheme.physical_dim();
    let (lf, hf) = af.support_box();
    let (lr, hr) = ar.support_box();
    let region = Region::Box { lo: [lf, lr].concat(), hi: [hf, hr].concat() };
    let pts = enumerate_points(scheme.lattice(), &region)?;
    Ok(pts.par_iter().map(|p| af.eval(&p.point[..n]) * ar.eval(&p.point[n..])).sum::<Complex64>().re)
}

/// `covol^{−p} Σ_{|ξ| ≤ R} |f̂(ξ₁)|²|r̂(ξ₂)|²` and the sum over `R/2 < |ξ| ≤ R`.
pub fn dual_side(scheme: &Scheme, f: &TestFunction, r: &TestFunction, dual_radius: f64, exponent: f64) -> Result<(f64, f64)> {
    check_dims(scheme, f, r)?;
    if f.is_zero() || r.is_zero() {
        return Ok((0.0, 0.0));
    }
    let n = scheme.physical_dim();
    let d = n + scheme.internal_dim();
    let dual = scheme.lattice().dual()?;
    let pts = enumerate_points(&dual, &Region::ball(vec![0.0; d], dual_radius))?;
    let norm = scheme.covolume().powf(exponent);
    let (total, shell) = pts
        .par_iter()
        .map(|p| {
            let v = f.fourier_transform(&p.point[..n]).norm_sqr() * r.fourier_transform(&p.point[n..]).norm_sqr();
            let radius = p.point.iter().map(|x| x * x).sum::<f64>().sqrt();
            (v, if radius > 0.5 * dual_radius { v } else { 0.0 })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((total / norm, shell / norm))
}

/// `∫_{FD} |Σ_γ (f ⊗ r)(x + γ)|² dx` over the fundamental parallelepiped, by
/// the midpoint rule with `grid` points per axis (spectrally accurate for
/// smooth periodic integrands).
pub fn quotient_norm_sq(scheme: &Scheme, f: &TestFunction, r: &TestFunction, grid: usize) -> Result<f64> {
    check_dims(scheme, f, r)?;
    if f.is_zero() || r.is_zero() {
        return Ok(0.0);
    }
    let n = scheme.physical_dim();
    let d = n + scheme.internal_dim();
    let basis = scheme.lattice();
    let (lf, hf) = f.support_box();
    let (lr, hr) = r.support_box();
    // corners of the fundamental domain
    let mut fd_lo = vec![0.0; d];
    let mut fd_hi = vec![0.0; d];
    for j in 0..d {
        let col = basis.column(j);
        for i in 0..d {
            if col[i] < 0.0 {
                fd_lo[i] += col[i];
            } else {
                fd_hi[i] += col[i];
            }
        }
    }
    let lo: Vec<f64> = lf.iter().chain(&lr).zip(&fd_hi).map(|(s, f)| s - f).collect();
    let hi: Vec<f64> = hf.iter().chain(&hr).zip(&fd_lo).map(|(s, f)| s - f).collect();
    let shifts: Vec<Vec<f64>> = enumerate_points(basis, &Region::Box { lo, hi })?.into_iter().map(|p| p.point).collect();
    let cells = grid.pow(d as u32);
    let cols = basis.columns();
    let total: f64 = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let mut s = vec![0.0; d];
            let mut rest = idx;
            for v in s.iter_mut() {
                *v = ((rest % grid) as f64 + 0.5) / grid as f64;
                rest /= grid;
            }
            let x: Vec<f64> = (0..d).map(|i| (0..d).map(|j| cols[(i, j)] * s[j]).sum()).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut y = vec![0.0; d];
            for g in &shifts {
                for i in 0..d {
                    y[i] = x[i] + g[i];
                }
                if y[..n].iter().zip(&lf).any(|(v, l)| v < l) || y[..n].iter().zip(&hf).any(|(v, h)| v > h) {
                    continue;
                }
                acc += f.eval(&y[..n]) * r.eval(&y[n..]);
            }
            acc.norm_sqr()
        })
        .sum();
    Ok(total * scheme.covolume() / cells as f64)
}

fn default_grid(dim: usize) -> usize {
    match dim {
        0..=2 => 128,
        3 => 40,
        _ => 14,
    }
}

/// Lattice side, dual side and quotient-norm quadrature of the same quantity.
pub fn poisson_triple_check(scheme: &Scheme, f: &TestFunction, r: &TestFunction, dual_radius: f64) -> Result<TripleReport> {
    let lhs_lattice = lattice_side(scheme, f, r)?;
    let (rhs_dual, dual_tail) = dual_side(scheme, f, r, dual_radius, 1.0)?;
    if dual_tail > 1e-8 {
        return Err(Error::TailBound { tail: dual_tail, limit: 1e-8 });
    }
    let mid_quadrature = quotient_norm_sq(scheme, f, r, default_grid(scheme.lattice().dim()))?;
    let max_rel_err = rel(lhs_lattice, rhs_dual).max(rel(lhs_lattice, mid_quadrature)).max(rel(rhs_dual, mid_quadrature));
    Ok(TripleReport { lhs_lattice, rhs_dual, mid_quadrature, max_rel_err, dual_tail })
}

/// Fixing the covolume exponent of the dual side from two reference lattices.
#[derive(Clone, Debug, Serialize)]
pub struct CalibrationReport {
    /// Tent ⊗ tent on `ℤ²`, where the covolume is 1: lattice and dual sides.
    pub unit_lattice: f64,
    pub unit_dual: f64,
    /// Gaussians on `2ℤ × 2ℤ`.
    pub scaled_lattice: f64,
    pub scaled_dual_unnormalized: f64,
    /// `p` with `lattice = covol^{−p} · dual`.
    pub exponent: f64,
    pub calibrated_rel_err: f64,
    /// `max/min` ratio of the dual side to the lattice side for `p ± 1`.
    pub ratio_plus_one: f64,
    pub ratio_minus_one: f64,
}

pub fn calibrate_normalization() -> Result<CalibrationReport> {
    let unit = Scheme::scaled_integer(1, 1, 1.0)?;
    let tent = TestFunction::tent();
    let unit_lattice = lattice_side(&unit, &tent, &tent)?;
    let (unit_dual, _) = dual_side(&unit, &tent, &tent, 6.0, 0.0)?;

    let scaled = Scheme::scaled_integer(1, 1, 2.0)?;
    let g = TestFunction::gaussian(0.5);
    let scaled_lattice = lattice_side(&scaled, &g, &g)?;
    let (raw, _) = dual_side(&scaled, &g, &g, 6.0, 0.0)?;
    let covol = scaled.covolume();
    let exponent = (raw / scaled_lattice).ln() / covol.ln();
    let p = exponent.round();
    let calibrated = raw / covol.powf(p);
    let ratio = |q: f64| {
        let v = raw / covol.powf(q);
        v.max(scaled_lattice) / v.min(scaled_lattice)
    };
    Ok(CalibrationReport {
        unit_lattice,
        unit_dual,
        scaled_lattice,
        scaled_dual_unnormalized: raw,
        exponent,
        calibrated_rel_err: rel(calibrated, scaled_lattice),
        ratio_plus_one: ratio(p + 1.0),
        ratio_minus_one: ratio(p - 1.0),
    })
}

/// Empirical versus theoretical pairing with `f* ∗ f`.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    pub empirical: f64,
    pub theoretical: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// Contribution of atoms in the outer shell of the dual ball.
    pub tail_estimate: f64,
    pub cutoff: f64,
    /// Points per unit volume counted in the averaging region.
    pub counted_density: f64,
    pub trivial_intensity: f64,
    /// `|trivial_intensity − counted_density²| / counted_density²`.
    pub trivial_rel_gap: f64,
}

/// Compares `η_P(f*∗f)` from the window-averaged autocorrelation over `f_t`
/// with `Σ_ω I(ω) |f̂(ω)|²` from `diffraction`.
pub fn consistency_harness(
    model_set: &ModelSet,
    f_t: &Region,
    k: &PointGroup,
    f: &TestFunction,
    diffraction: &PurePointMeasure,
) -> Result<ConsistencyReport> {
    let g = f.autocorrelation();
    let cutoff = g.support_radius() * (1.0 + 1e-9);
    let counted_density = model_set.points.iter().filter(|p| f_t.contains(&p.physical)).count() as f64 / f_t.volume();
    let empirical = if f.is_zero() {
        0.0
    } else {
        let ac = empirical_autocorr(model_set, f_t, cutoff)?;
        if k.order() > 1 {
            pair_radial(&radialize(&ac, k), &g)?.re
        } else {
            pair_against_test_function(&ac, &g)?.re
        }
    };
    if !f.is_zero() && k.order() > 1 {
        // rejects non-invariant f up front
        spherical_ft(f, k, &SphericalLabel::Bessel { xi1: vec![0.0; k.dim()] })?;
    }
    let (theoretical, tail_estimate) = diffraction
        .atoms
        .par_iter()
        .map(|a| {
            let v = a.intensity * orbit_average_ft(f, k, a.xi1()).norm_sqr();
            (v, if a.max_norm() > 0.5 * diffraction.dual_radius { v } else { 0.0 })
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0 + y.0, x.1 + y.1));
    let trivial_intensity = diffraction.trivial_intensity();
    let d2 = counted_density * counted_density;
    Ok(ConsistencyReport {
        empirical,
        theoretical,
        abs_gap: (empirical - theoretical).abs(),
        rel_gap: rel(empirical, theoretical),
        tail_estimate,
        cutoff,
        counted_density,
        trivial_intensity,
        trivial_rel_gap: if d2 > 0.0 { (trivial_intensity - d2).abs() / d2 } else { trivial_intensity.abs() },
    })
}

/// `‖P_Γ(f ⊗ r)‖₂ ≤ C ‖f‖_{2,α} ‖r‖_{2,α}`.
#[derive(Clone, Debug, Serialize)]
pub struct NormBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub norm_f: f64,
    pub norm_r: f64,
    pub passed: bool,
}

pub fn periodization_norm_bound_check(f: &TestFunction, r: &TestFunction, params: &WeightedNormParams, scheme: &Scheme) -> Result<NormBoundReport> {
    let constant = match params.constant {
        Some(c) => c,
        None => WeightedNormParams::for_scheme(params.alpha, params.metric, scheme)?.constant.expect("computed"),
    };
    let lhs = quotient_norm_sq(scheme, f, r, default_grid(scheme.lattice().dim()))?.sqrt();
    let norm_f = weighted_norm(f, params)?;
    let norm_r = weighted_norm(r, params)?;
    let rhs = constant * norm_f * norm_r;
    Ok(NormBoundReport { lhs, rhs, constant, norm_f, norm_r, passed: lhs <= rhs * (1.0 + 1e-6) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::Metric;
    use crate::scheme::cut_and_project;
    use std::f64::consts::SQRT_2;

    fn chain_point(c: f64, d: f64) -> [f64; 2] {
        [c / 2.0 + d * SQRT_2 / 4.0, c / 2.0 - d * SQRT_2 / 4.0]
    }

    #[test]
    fn meyer_worked_values() {
        let s = Scheme::sqrt2_chain();
        let w = Window::interval(-1.0, 1.0);
        let m = meyer_diffraction(&s, &w, 6.0).unwrap();
        assert!((m.trivial_intensity() - 0.5).abs() < 1e-14);
        let k = PointGroup::trivial(1);
        let p = chain_point(1.0, 0.0);
        assert!(m.intensity_at(&k, &p[..1]) < 1e-30);
        let p = chain_point(0.0, 1.0);
        let ft = 2.0 * (2.0 * std::f64::consts::PI * p[1]).sin() / (2.0 * std::f64::consts::PI * p[1]);
        assert!((m.intensity_at(&k, &p[..1]) - ft * ft / 8.0).abs() < 1e-14);
        assert!((m.intensity_at(&k, &p[..1]) - 0.064_149_2).abs() < 1e-7);
        assert!(m.atoms.iter().all(|a| a.intensity >= 0.0));
    }

    #[test]
    fn symmetric_window_gives_symmetric_intensities() {
        let s = Scheme::sqrt2_chain();
        let m = meyer_diffraction(&s, &Window::interval(-1.0, 1.0), 5.0).unwrap();
        let k = PointGroup::trivial(1);
        for a in &m.atoms {
            let neg: Vec<f64> = a.xi1().iter().map(|v| -v).collect();
            if a.max_norm() < 2.5 {
                assert_eq!(a.intensity, m.intensity_at(&k, &neg));
            }
        }
    }

    #[test]
    fn intensities_invariant_under_basis_change() {
        let s = Scheme::sqrt2_chain();
        let u = nalgebra::DMatrix::from_row_slice(2, 2, &[2, 1, 1, 1]);
        let t = s.recombined(&u).unwrap();
        let w = Window::interval(-0.8, 1.1);
        let a = meyer_diffraction(&s, &w, 5.1).unwrap();
        let b = meyer_diffraction(&t, &w, 5.1).unwrap();
        assert_eq!(a.atoms.len(), b.atoms.len());
        let k = PointGroup::trivial(1);
        for x in &a.atoms {
            assert!((x.intensity - b.intensity_at(&k, x.xi1())).abs() <= 1e-9);
        }
    }

    #[test]
    fn empty_window_has_no_intensity() {
        let m = meyer_diffraction(&Scheme::sqrt2_chain(), &Window::Empty { dim: 1 }, 4.0).unwrap();
        assert!(m.atoms.iter().all(|a| a.intensity == 0.0));
    }

    #[test]
    fn shadow_transform_reductions() {
        let s = Scheme::sqrt2_chain();
        let r = ShadowInput::Function(TestFunction::gaussian(0.6));
        let p = chain_point(1.0, 2.0);
        let triv = shadow_transform_va(&s, &PointGroup::trivial(1), &r, &p[..1]).unwrap();
        let expected = TestFunction::gaussian(0.6).fourier_transform(&p[1..]).norm_sqr();
        assert!((triv.value - expected).abs() < 1e-15);
        let sym = shadow_transform_va(&s, &PointGroup::sign(1), &r, &p[..1]).unwrap();
        let neg = TestFunction::gaussian(0.6).fourier_transform(&[-p[1]]).norm_sqr();
        assert!((sym.value - expected - neg).abs() < 1e-15);
        let zero = shadow_transform_va(&s, &PointGroup::sign(1), &ShadowInput::Function(TestFunction::zero(1)), &p[..1]).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(matches!(
            shadow_transform_va(&s, &PointGroup::trivial(1), &r, &[0.123]),
            Err(Error::LabelNotInSpectrum(_))
        ));
    }

    #[test]
    fn d4_orbit_intensity_matches_direct_enumeration() {
        let s = Scheme::scaled_integer(2, 2, 1.0).unwrap();
        let k = PointGroup::dihedral(4);
        let w = Window::Box { lo: vec![-0.5, -0.3], hi: vec![0.5, 0.3] };
        let m = spherical_diffraction(&s, &k, &w, 4.0).unwrap();
        let got = m.intensity_at(&k, &[1.0, 0.0]);
        // the dual is ℤ⁴, so every ξ₂ ∈ ℤ² in the ball is a partner
        let mut direct = 0.0;
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                if 1 + a * a + b * b <= 16 {
                    direct += w.fourier_transform(&[a as f64, b as f64]).norm_sqr();
                }
            }
        }
        // four orbit points, each with the same partner set
        assert!((got - 4.0 * direct).abs() < 1e-12 * direct.max(1.0));
        let rep = k.representative(&[1.0, 0.0]);
        let atom = m.atoms.iter().find(|a| a.xi1() == rep.as_slice()).unwrap();
        assert_eq!(atom.members.iter().filter(|(_, x2)| x2.iter().all(|v| *v == 0.0)).count(), 4);
    }

    #[test]
    fn tent_triple_on_unit_lattice() {
        let s = Scheme::scaled_integer(1, 1, 1.0).unwrap();
        let t = TestFunction::tent();
        let rep = poisson_triple_check(&s, &t, &t, 6.0).unwrap();
        for v in [rep.lhs_lattice, rep.rhs_dual, rep.mid_quadrature] {
            assert!((v - 1.0).abs() <= 1e-9, "{rep:?}");
        }
        let z = poisson_triple_check(&s, &TestFunction::zero(1), &TestFunction::zero(1), 6.0).unwrap();
        assert_eq!((z.lhs_lattice, z.rhs_dual, z.mid_quadrature, z.max_rel_err), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn gaussian_triple_on_sqrt2_chain() {
        let s = Scheme::sqrt2_chain();
        let g = TestFunction::gaussian(0.5);
        let rep = poisson_triple_check(&s, &g, &g, 6.0).unwrap();
        assert!(rep.max_rel_err <= 1e-6, "{rep:?}");
    }

    #[test]
    fn calibration_pins_exponent_one() {
        let c = calibrate_normalization().unwrap();
        assert!((c.unit_lattice - 1.0).abs() < 1e-12 && (c.unit_dual - 1.0).abs() < 1e-9);
        assert!((c.exponent - 1.0).abs() < 1e-9);
        assert!(c.calibrated_rel_err <= 1e-9);
        assert!(c.ratio_plus_one >= 4.0 * (1.0 - 1e-9) && c.ratio_minus_one >= 4.0 * (1.0 - 1e-9));
    }

    #[test]
    fn norm_bound_on_tents() {
        let s = Scheme::scaled_integer(1, 1, 1.0).unwrap();
        let params = WeightedNormParams::for_scheme(1.0, Metric::L1, &s).unwrap();
        let t = TestFunction::tent();
        let rep = periodization_norm_bound_check(&t, &t, &params, &s).unwrap();
        assert!(rep.passed, "{rep:?}");
        let z = periodization_norm_bound_check(&TestFunction::zero(1), &TestFunction::zero(1), &params, &s).unwrap();
        assert!(z.passed && z.lhs == 0.0 && z.rhs == 0.0);
    }

    #[test]
    fn consistency_trivial_cases() {
        let s = Scheme::sqrt2_chain();
        let w = Window::interval(-1.0, 1.0);
        let ms = cut_and_project(&s, &w, &Region::interval(-120.0, 120.0)).unwrap();
        let m = meyer_diffraction(&s, &w, 6.0).unwrap();
        let k = PointGroup::trivial(1);
        let rep = consistency_harness(&ms, &Region::interval(-100.0, 100.0), &k, &TestFunction::zero(1), &m).unwrap();
        assert_eq!((rep.empirical, rep.theoretical), (0.0, 0.0));
        let empty = cut_and_project(&s, &Window::Empty { dim: 1 }, &Region::interval(-120.0, 120.0)).unwrap();
        let m0 = meyer_diffraction(&s, &Window::Empty { dim: 1 }, 6.0).unwrap();
        let rep = consistency_harness(&empty, &Region::interval(-100.0, 100.0), &k, &TestFunction::gaussian(0.4), &m0).unwrap();
        assert_eq!((rep.empirical, rep.theoretical), (0.0, 0.0));
    }
}
