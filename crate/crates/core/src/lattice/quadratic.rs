//! Exact arithmetic in real quadratic fields ℚ(√s).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// A number `a + b·√s` with rational `a`, `b` and squarefree `s`.
///
/// Rational numbers are represented with `b = 0`; their `s` is irrelevant and
/// arithmetic between a rational and an element of ℚ(√s) adopts `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    pub a: Rational,
    pub b: Rational,
    pub s: i64,
}

fn is_squarefree(s: i64) -> bool {
    if s == 0 || s == 1 {
        return false;
    }
    let n = s.unsigned_abs();
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

impl QuadraticNumber {
    /// `a + b√s`. Panics if `s` is not squarefree (≠ 0, 1).
    pub fn new(a: Rational, b: Rational, s: i64) -> Self {
        assert!(is_squarefree(s), "radicand {s} is not squarefree");
        Self { a, b, s }
    }

    pub fn from_integers(a: i64, b: i64, s: i64) -> Self {
        Self::new(Rational::from_integer(a as i128), Rational::from_integer(b as i128), s)
    }

    pub fn rational(a: Rational) -> Self {
        Self { a, b: Rational::zero(), s: 2 }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(Rational::from_integer(n as i128))
    }

    /// √s itself.
    pub fn sqrt(s: i64) -> Self {
        Self::from_integers(0, 1, s)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    pub fn conjugate(&self) -> Self {
        Self { a: self.a, b: -self.b, s: self.s }
    }

    /// Field norm `a² − s·b²`.
    pub fn norm(&self) -> Rational {
        self.a * self.a - Rational::from_integer(self.s as i128) * self.b * self.b
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.s as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn recip(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conjugate();
        Some(Self { a: c.a / n, b: c.b / n, s: self.s })
    }

    /// Sign of the real number (exact).
    pub fn signum(&self) -> i32 {
        // sign(a + b√s) with s > 0 decided by comparing a² and s b².
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb.is_zero() {
            return sa.to_i32().unwrap_or(0);
        }
        if sa.is_zero() || sa == sb {
            return sb.to_i32().unwrap_or(0);
        }
        assert!(self.s > 0, "ordering requires a real quadratic field");
        let lhs = self.a * self.a;
        let rhs = Rational::from_integer(self.s as i128) * self.b * self.b;
        if lhs > rhs {
            sa.to_i32().unwrap_or(0)
        } else if lhs < rhs {
            sb.to_i32().unwrap_or(0)
        } else {
            0
        }
    }

    fn unify(self, other: Self) -> (Self, Self, i64) {
        let s = match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => self.s,
            (true, false) => other.s,
            (false, true) => self.s,
            (false, false) => {
                assert_eq!(self.s, other.s, "mixing different quadratic fields");
                self.s
            }
        };
        (self, other, s)
    }
}

impl Zero for QuadraticNumber {
    fn zero() -> Self {
        Self::integer(0)
    }
    fn is_zero(&self) -> bool {
        QuadraticNumber::is_zero(self)
    }
}

impl One for QuadraticNumber {
    fn one() -> Self {
        Self::integer(1)
    }
}

impl Add for QuadraticNumber {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (x, y, s) = self.unify(rhs);
        Self { a: x.a + y.a, b: x.b + y.b, s }
    }
}

impl Sub for QuadraticNumber {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for QuadraticNumber {
    type Output = Self;
    fn neg(self) -> Self {
        Self { a: -self.a, b: -self.b, s: self.s }
    }
}

impl Mul for QuadraticNumber {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (x, y, s) = self.unify(rhs);
        let sr = Rational::from_integer(s as i128);
        Self { a: x.a * y.a + sr * x.b * y.b, b: x.a * y.b + x.b * y.a, s }
    }
}

impl Div for QuadraticNumber {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.recip().expect("division by zero in quadratic field");
        self * inv
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}√{}", self.b, self.s)
        } else {
            write!(f, "{}+{}√{}", self.a, self.b, self.s)
        }
    }
}
