//! Radial Laguerre–Gaussian functions on `ℂ`, the spherical functions of the
//! Heisenberg group with non-trivial central character.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::periodic_mean;

use super::beta;

/// `ω(q) = L_m(2π|λ||q|²) e^{−π|λ||q|²}` for the central character
/// `t ↦ e^{2πiλt}`. It satisfies `ω(0) = 1` and
/// `(1/2π)∫ ω(x + e^{iθ}y) χ(Im(x̄ e^{iθ} y)) dθ = ω(x) ω(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaguerreSpherical {
    pub lambda: f64,
    pub m: u32,
}

/// Outcome of the decay-envelope check.
#[derive(Clone, Debug, Serialize)]
pub struct EdcReport {
    pub c: f64,
    /// Coefficients of the envelope polynomial in `|q|²`.
    pub envelope: Vec<f64>,
    pub radius: f64,
    /// Largest observed `|ω(q)| / (L(|q|²) e^{−c|q|²})`.
    pub max_ratio: f64,
    pub passed: bool,
}

impl LaguerreSpherical {
    pub fn new(lambda: f64, m: u32) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::TrivialCharacter);
        }
        Ok(Self { lambda, m })
    }

    fn scale(&self) -> f64 {
        2.0 * PI * self.lambda.abs()
    }

    /// Coefficients `ℓ_k` of `L_m(s) = Σ ℓ_k s^k`.
    pub fn laguerre_coefficients(&self) -> Vec<f64> {
        let m = self.m as usize;
        let mut out = Vec::with_capacity(m + 1);
        let mut binom = 1.0;
        let mut fact = 1.0;
        for k in 0..=m {
            if k > 0 {
                binom *= (m + 1 - k) as f64 / k as f64;
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out.push(sign * binom / fact);
        }
        out
    }

    pub fn laguerre(&self, s: f64) -> f64 {
        // three-term recurrence
        let (mut prev, mut cur) = (1.0, 1.0 - s);
        if self.m == 0 {
            return 1.0;
        }
        for k in 1..self.m {
            let k = k as f64;
            let next = ((2.0 * k + 1.0 - s) * cur - k * prev) / (k + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Value at `|q|² = r2`.
    pub fn eval_radial(&self, r2: f64) -> f64 {
        self.laguerre(self.scale() * r2) * (-0.5 * self.scale() * r2).exp()
    }

    pub fn eval(&self, q: Complex64) -> f64 {
        self.eval_radial(q.norm_sqr())
    }

    /// `‖ω‖²_{L²(ℂ)} = 1 / (2|λ|)`.
    pub fn norm_sq(&self) -> f64 {
        1.0 / (2.0 * self.lambda.abs())
    }

    /// `|(1/2π)∫ ω(x + e^{iθ}y) χ(β(x, e^{iθ}y)) dθ − ω(x)ω(y)|`.
    pub fn functional_equation_residual(&self, x: Complex64, y: Complex64) -> f64 {
        let n = 64 + 8 * (self.scale() * x.norm() * y.norm()).ceil() as usize;
        let mean = periodic_mean(
            |theta| {
                let ky = Complex64::from_polar(1.0, theta) * y;
                Complex64::from_polar(self.eval(x + ky), 2.0 * PI * self.lambda * beta(x, ky))
            },
            n.max(256),
        );
        (mean - self.eval(x) * self.eval(y)).norm()
    }

    /// Largest residual over `samples` random pairs with `|x|, |y| ≤ radius`.
    pub fn functional_equation_check(&self, samples: usize, radius: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = |rng: &mut ChaCha8Rng| Complex64::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
        (0..samples)
            .map(|_| {
                let x = point(&mut rng);
                let y = point(&mut rng);
                self.functional_equation_residual(x, y)
            })
            .fold(0.0, f64::max)
    }

    /// Envelope `L(s) = Σ|ℓ_k|(2π|λ|s)^k`, `c = π|λ|`, checked on a radial grid
    /// of `|q| ≤ radius`.
    pub fn edc_check(&self, radius: f64, grid: usize) -> EdcReport {
        let c = 0.5 * self.scale();
        let envelope: Vec<f64> = self
            .laguerre_coefficients()
            .iter()
            .enumerate()
            .map(|(k, l)| l.abs() * self.scale().powi(k as i32))
            .collect();
        let mut max_ratio = 0.0f64;
        for i in 0..=grid {
            let r = radius * i as f64 / grid as f64;
            let s = r * r;
            let bound = envelope.iter().rev().fold(0.0, |acc, e| acc * s + e) * (-c * s).exp();
            let value = self.eval_radial(s).abs();
            if bound > 0.0 {
                max_ratio = max_ratio.max(value / bound);
            } else if value > 0.0 {
                max_ratio = f64::INFINITY;
            }
        }
        EdcReport { c, envelope, radius, max_ratio, passed: max_ratio <= 1.0 + 1e-12 }
    }
}
