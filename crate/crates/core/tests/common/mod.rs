//! Quadrature oracles built independently of the crate: Golub–Welsch
//! eigen-decompositions of the Jacobi matrices.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

fn golub_welsch(n: usize, off: impl Fn(usize) -> f64, mu0: f64) -> Vec<(f64, f64)> {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = off(k);
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn legendre(n: usize) -> Vec<(f64, f64)> {
    golub_welsch(n, |k| k as f64 / ((4 * k * k - 1) as f64).sqrt(), 2.0)
}

/// Gauss–Hermite nodes and weights for the weight `e^{−p²}`.
pub fn hermite(n: usize) -> Vec<(f64, f64)> {
    golub_welsch(n, |k| (k as f64 / 2.0).sqrt(), std::f64::consts::PI.sqrt())
}

/// Composite Gauss–Legendre integral of `f` over `[lo, hi]`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, pieces: usize, points: usize) -> f64 {
    let rule = legendre(points);
    let w = (hi - lo) / pieces as f64;
    let mut sum = 0.0;
    for i in 0..pieces {
        let a = lo + i as f64 * w;
        for (x, wt) in &rule {
            sum += 0.5 * w * wt * f(a + 0.5 * w * (x + 1.0));
        }
    }
    sum
}

/// Probabilists' Hermite polynomial by the three-term recurrence.
pub fn he(n: usize, p: f64) -> f64 {
    let (mut a, mut b) = (1.0, p);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = p * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}
