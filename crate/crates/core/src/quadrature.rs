//! Quadrature rules and a few special functions shared by the numerical checks.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::{Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// A symmetric rule: nodes and weights.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn golub_welsch(n: usize, offdiag: impl Fn(usize) -> f64, mu0: f64) -> Rule {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = offdiag(k);
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize to remove eigen-solver noise
    for i in 0..n / 2 {
        let k = n - 1 - i;
        let x = 0.5 * (pairs[k].0 - pairs[i].0);
        let w = 0.5 * (pairs[k].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

fn cached(table: &'static OnceLock<Mutex<Vec<Option<Rule>>>>, n: usize, build: impl FnOnce() -> Rule) -> Rule {
    let lock = table.get_or_init(|| Mutex::new(Vec::new()));
    {
        let guard = lock.lock().expect("rule cache poisoned");
        if let Some(Some(r)) = guard.get(n) {
            return r.clone();
        }
    }
    let rule = build();
    let mut guard = lock.lock().expect("rule cache poisoned");
    if guard.len() <= n {
        guard.resize(n + 1, None);
    }
    guard[n] = Some(rule.clone());
    rule
}

/// `n`-point Gauss–Legendre rule on [−1, 1], Newton-refined.
pub fn gauss_legendre(n: usize) -> Rule {
    static TABLE: OnceLock<Mutex<Vec<Option<Rule>>>> = OnceLock::new();
    assert!(n > 0);
    cached(&TABLE, n, || {
        let mut rule = golub_welsch(n, |k| k as f64 / ((4 * k * k - 1) as f64).sqrt(), 2.0);
        for (x, w) in rule.nodes.iter_mut().zip(rule.weights.iter_mut()) {
            for _ in 0..3 {
                let (p, dp) = legendre_with_derivative(n, *x);
                *x -= p / dp;
            }
            let (_, dp) = legendre_with_derivative(n, *x);
            *w = 2.0 / ((1.0 - *x * *x) * dp * dp);
        }
        rule
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Hermite rule for `∫ e^{−x²} g(x) dx`.
pub fn gauss_hermite(n: usize) -> Rule {
    static TABLE: OnceLock<Mutex<Vec<Option<Rule>>>> = OnceLock::new();
    assert!(n > 0);
    cached(&TABLE, n, || golub_welsch(n, |k| (k as f64 / 2.0).sqrt(), PI.sqrt()))
}

/// Fixed Gauss–Legendre on `[a, b]` split into `panels` equal pieces.
pub fn gauss_legendre_composite<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize, n: usize) -> T {
    let rule = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc = acc + f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

// Gauss–Kronrod 7/15 abscissae and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).magnitude())
}

/// Adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
pub fn adaptive<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, tol: f64) -> Result<T> {
    adaptive_with_limit(&f, a, b, tol, 2000)
}

pub fn adaptive_with_limit<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64, tol: f64, max_intervals: usize) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let (v, e) = gk15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol {
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "adaptive rule on [{a}, {b}] stalled at error {err:.3e} (tol {tol:.3e})"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, v, e) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        total = total - v + v1 + v2;
        err = err - e + e1 + e2;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if !(mid > lo && hi > mid) {
            return Err(Error::Quadrature("interval underflow".into()));
        }
    }
    // recompute the sum to shed cancellation from incremental updates
    let mut sum = T::zero();
    for iv in &intervals {
        sum = sum + iv.2;
    }
    Ok(sum)
}

/// Adaptive integration over a union of breakpoint-separated pieces.
pub fn adaptive_piecewise<T: QuadValue>(f: impl Fn(f64) -> T, breaks: &[f64], tol: f64) -> Result<T> {
    let mut acc = T::zero();
    let pieces = breaks.len().saturating_sub(1).max(1);
    for w in breaks.windows(2) {
        acc = acc + adaptive_with_limit(&f, w[0], w[1], tol / pieces as f64, 2000)?;
    }
    Ok(acc)
}

/// Trapezoidal rule for a `2π`-periodic integrand, returning the mean value.
pub fn periodic_mean<T: QuadValue>(f: impl Fn(f64) -> T, n: usize) -> T {
    let mut acc = T::zero();
    for k in 0..n {
        acc = acc + f(2.0 * PI * k as f64 / n as f64);
    }
    acc * (1.0 / n as f64)
}

/// Bessel function `J_n(x)` from its integral representation; the trapezoidal
/// rule is spectrally accurate on the periodic integrand.
pub fn bessel_j(order: i32, x: f64) -> f64 {
    let n = (2.0 * x.abs()) as usize + 64;
    periodic_mean(|t| (x * t.sin() - order as f64 * t).cos(), n)
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j(0, x)
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j(1, x)
}

/// `2 J₁(u)/u`, equal to 1 at `u = 0`.
pub fn jinc(u: f64) -> f64 {
    if u.abs() < 1e-6 {
        1.0 - u * u / 8.0
    } else {
        2.0 * bessel_j1(u) / u
    }
}

/// `sin(x)/x`, equal to 1 at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
