//! Truncated Taylor series ("jets") for exact high-order derivatives of
//! closed-form expressions.
//!
//! A jet of length `n` stores the normalized Taylor coefficients
//! `c[j] = f^(j)(x0) / j!` for `j < n`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    /// The independent variable `x` expanded about `x0`.
    pub fn variable(x0: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = x0;
        if len > 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn constant(v: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = v;
        Self { c }
    }

    pub fn from_coefficients(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Self { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// `f^(m)(x0)`.
    pub fn derivative(&self, m: usize) -> f64 {
        self.c[m] * factorial(m)
    }

    /// All derivatives `f^(j)(x0)` for `j < len`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.derivative(m)).collect()
    }

    /// Jet of `f'`, one term shorter.
    pub fn differentiate(&self) -> Self {
        let n = self.len();
        if n == 1 {
            return Self::constant(0.0, 1);
        }
        Self {
            c: (1..n).map(|j| j as f64 * self.c[j]).collect(),
        }
    }

    /// Keeps the first `len` terms.
    pub fn truncate(&self, len: usize) -> Self {
        Self {
            c: self.c[..len.min(self.len())].to_vec(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    pub fn recip(&self) -> Self {
        let n = self.len();
        let a = &self.c;
        let mut r = vec![0.0; n];
        r[0] = 1.0 / a[0];
        for j in 1..n {
            let s: f64 = (1..=j).map(|i| a[i] * r[j - i]).sum();
            r[j] = -s / a[0];
        }
        Self { c: r }
    }

    pub fn exp(&self) -> Self {
        // e' = u' e
        let n = self.len();
        let a = &self.c;
        let mut e = vec![0.0; n];
        e[0] = a[0].exp();
        for j in 1..n {
            let s: f64 = (1..=j).map(|i| i as f64 * a[i] * e[j - i]).sum();
            e[j] = s / j as f64;
        }
        Self { c: e }
    }

    pub fn sqrt(&self) -> Self {
        let n = self.len();
        let a = &self.c;
        let mut r = vec![0.0; n];
        r[0] = a[0].sqrt();
        for j in 1..n {
            let s: f64 = (1..j).map(|i| r[i] * r[j - i]).sum();
            r[j] = (a[j] - s) / (2.0 * r[0]);
        }
        Self { c: r }
    }

    pub fn erf(&self) -> Self {
        // erf(u)' = 2/√π · exp(−u²) · u'
        let n = self.len();
        let mut c = vec![0.0; n];
        c[0] = libm::erf(self.c[0]);
        if n > 1 {
            let g = (self * self).neg().exp().scale(2.0 / std::f64::consts::PI.sqrt());
            let du = self.differentiate();
            let prod = &g.truncate(n - 1) * &du;
            for j in 1..n {
                c[j] = prod.c[j - 1] / j as f64;
            }
        }
        Self { c }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(1.0, self.len());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.len(), rhs.len());
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert_eq!(self.len(), rhs.len());
        Jet {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        assert_eq!(self.len(), rhs.len());
        let n = self.len();
        let c = (0..n)
            .map(|j| (0..=j).map(|i| self.c[i] * rhs.c[j - i]).sum())
            .collect();
        Jet { c }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
