use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n`-point rule, exact for polynomials up to degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::invalid("quad_points", format!("{n} is not in 1..=64")));
        }
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton on P_n starting from the Chebyshev-like guess.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Points and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&xi, &w)| (mid + half * xi, half * w))
    }

    /// Composite integral of `f` over `[lo, hi]` split into `pieces` panels.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, pieces: usize, f: F) -> f64 {
        let pieces = pieces.max(1);
        let dx = (hi - lo) / pieces as f64;
        (0..pieces)
            .map(|j| {
                let a = lo + j as f64 * dx;
                self.mapped(a, a + dx).map(|(x, w)| w * f(x)).sum::<f64>()
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, d)
}
