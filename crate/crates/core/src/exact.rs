//! Closed-form Wigner coefficient functions used as references.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::fem1d::Mesh1D;
use crate::hermite::{f_from_h, h_from_derivatives, CoefficientSet};
use crate::jet::factorial;
use crate::potentials::hooke_exact_density_jet;

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Gaussian moments `q_i(t) = E[p^{2i}]` for `p ~ N(t/2, 1/2)` as polynomials
/// in `t`, built by `q ↦ q' + (t/2) q` applied twice per step.
fn gaussian_moments(max_i: usize) -> Vec<Vec<f64>> {
    let step = |q: &[f64]| {
        let mut out = vec![0.0; q.len() + 1];
        for (j, &c) in q.iter().enumerate() {
            if j > 0 {
                out[j - 1] += j as f64 * c;
            }
            out[j + 1] += 0.5 * c;
        }
        out
    };
    let mut moments = vec![vec![1.0]];
    for _ in 0..max_i {
        let last = moments.last().unwrap();
        let next = step(&step(last));
        moments.push(next);
    }
    moments
}

/// Coefficient functions `f_0 … f_{2K}` of the `n`-th eigenstate of the
/// harmonic oscillator `V = x²/2`, whose Wigner function is
/// `(−1)^n/π e^{−(x²+p²)} L_n(2x² + 2p²)`.
pub fn harmonic_coefficients(mesh: Arc<Mesh1D>, n: usize, truncation: usize) -> CoefficientSet {
    let moments = gaussian_moments(n);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    CoefficientSet::from_fn(mesh, truncation, move |k, x| {
        // P(t) = Σ_m (−1)^m C(n,m)/m! Σ_i C(m,i) (2x²)^{m−i} 2^i q_i(t)
        let mut poly = vec![0.0; 2 * n + 1];
        for m in 0..=n {
            let outer = if m % 2 == 0 { 1.0 } else { -1.0 } * binomial(n, m) / factorial(m);
            for (i, q) in moments.iter().enumerate().take(m + 1) {
                let w = outer * binomial(m, i) * (2.0 * x * x).powi((m - i) as i32) * 2f64.powi(i as i32);
                for (p, c) in poly.iter_mut().zip(q) {
                    *p += w * c;
                }
            }
        }
        // coefficient of t^{2k} in e^{−t²/4} P(t)
        let mut sum = 0.0;
        for (j, &c) in poly.iter().enumerate() {
            if j <= 2 * k && (2 * k - j) % 2 == 0 {
                let r = (2 * k - j) / 2;
                sum += c * (-0.25f64).powi(r as i32) / factorial(r);
            }
        }
        sign * (-x * x).exp() / PI.sqrt() * sum
    })
}

/// `E_n = n + 1/2`.
pub fn harmonic_energy(n: usize) -> f64 {
    n as f64 + 0.5
}

/// Ground-state density of `V = −1/|x|`, `ρ₀ = 2x² e^{−2|x|}` (`∫ρ₀ = 1`).
pub fn hydrogen_density(x: f64) -> f64 {
    2.0 * x * x * (-2.0 * x.abs()).exp()
}

/// Coefficient functions of the hydrogen Wigner function
/// `2e^{−2|x|}(x² δ(p) + δ''(p)/4)`:
/// `f_{2k} = 2e^{−2|x|}/(2k)! · (x² He_{2k}(0) + He_{2k}''(0)/4)`.
pub fn hydrogen_coefficients(mesh: Arc<Mesh1D>, truncation: usize) -> CoefficientSet {
    // He_{2k}(0) = (−1)^k (2k−1)!!
    let he0 = |k: usize| -> f64 {
        let mut v = 1.0;
        for j in 0..k {
            v *= -((2 * j + 1) as f64);
        }
        v
    };
    CoefficientSet::from_fn(mesh, truncation, move |k, x| {
        let n = 2 * k;
        let second = if k == 0 { 0.0 } else { (n * (n - 1)) as f64 * he0(k - 1) };
        2.0 * (-2.0 * x.abs()).exp() / factorial(n) * (x * x * he0(k) + 0.25 * second)
    })
}

/// Coefficient functions of Hooke's-atom Kohn–Sham orbital `ψ = √(ρ/2)`,
/// normalized so `f_0 = ρ/2`. Derivatives of `ψ` are exact (Taylor mode).
pub fn hooke_coefficients(mesh: Arc<Mesh1D>, truncation: usize) -> Result<CoefficientSet> {
    let n = 2 * truncation + 1;
    let nodes = mesh.nodes().to_vec();
    let mut h = vec![vec![0.0; nodes.len()]; truncation + 1];
    for (i, &x) in nodes.iter().enumerate() {
        let psi = hooke_exact_density_jet(x, n).scale(0.5).sqrt();
        let d = psi.derivatives();
        for (k, hk) in h.iter_mut().enumerate() {
            hk[i] = h_from_derivatives(&d, k);
        }
    }
    f_from_h(mesh, &h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{ElementOrder, QuadratureRule};
    use crate::hermite::HermiteTable;
    use crate::potentials::hooke_exact_density;

    fn mesh(h: f64) -> Arc<Mesh1D> {
        Arc::new(Mesh1D::uniform(10.0, h, ElementOrder::Linear).unwrap())
    }

    fn laguerre(n: usize, t: f64) -> f64 {
        let (mut a, mut b) = (1.0, 1.0 - t);
        if n == 0 {
            return a;
        }
        for m in 1..n {
            let c = ((2 * m + 1) as f64 - t) * b / (m + 1) as f64 - m as f64 * a / (m + 1) as f64;
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn harmonic_matches_momentum_quadrature() {
        // f_{2k}(x) = 1/(2k)! ∫ He_{2k}(p) f(x, p) dp with the Laguerre form
        let m = mesh(0.5);
        let rule = QuadratureRule::gauss_legendre(40).unwrap();
        let table = HermiteTable::new(12);
        for n in 0..=3 {
            let f = harmonic_coefficients(m.clone(), n, 6);
            for x in [-2.0, -0.5, 0.0, 1.0, 3.0] {
                let i = m.nodes().iter().position(|v| (v - x).abs() < 1e-12).unwrap();
                for k in 0..=6 {
                    let q = rule.integrate(-12.0, 12.0, 24, |p| {
                        let s = x * x + p * p;
                        let w = if n % 2 == 0 { 1.0 } else { -1.0 } / PI * (-s).exp() * laguerre(n, 2.0 * s);
                        table.evaluate(p)[2 * k] * w
                    }) / factorial(2 * k);
                    let v = f.coeff(k)[i];
                    assert!((v - q).abs() < 1e-12, "n={n} x={x} k={k}: {v} vs {q}");
                }
            }
        }
    }

    #[test]
    fn harmonic_closed_forms() {
        let m = mesh(0.25);
        let g = harmonic_coefficients(m.clone(), 0, 3);
        let e = harmonic_coefficients(m.clone(), 1, 0);
        for (i, &x) in m.nodes().iter().enumerate() {
            let gauss = (-x * x).exp() / PI.sqrt();
            for k in 0..=3 {
                let expect = gauss * (-0.25f64).powi(k as i32) / factorial(k);
                assert!((g.coeff(k)[i] - expect).abs() < 1e-15);
            }
            assert!((e.coeff(0)[i] - 2.0 * x * x * gauss).abs() < 1e-14);
        }
        assert!((m.integrate(e.coeff(0)) - 1.0).abs() < 1e-3);
        assert_eq!(harmonic_energy(2), 2.5);
    }

    #[test]
    fn hydrogen_low_orders() {
        let m = Arc::new(Mesh1D::uniform(10.0, 0.1, ElementOrder::Quadratic).unwrap());
        let f = hydrogen_coefficients(m.clone(), 2);
        for (i, &x) in m.nodes().iter().enumerate() {
            let e = (-2.0 * x.abs()).exp();
            assert!((f.coeff(0)[i] - hydrogen_density(x)).abs() < 1e-15);
            assert!((f.coeff(1)[i] - e * (0.5 - x * x)).abs() < 1e-15);
            assert!((f.coeff(2)[i] - e * (x * x - 1.0) / 4.0).abs() < 1e-15);
        }
        assert!((m.integrate(f.coeff(0)) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hooke_coefficients_are_pure_state_moments() {
        let m = mesh(0.1);
        let f = hooke_coefficients(m.clone(), 2).unwrap();
        for (i, &x) in m.nodes().iter().enumerate() {
            assert!((f.coeff(0)[i] - 0.5 * hooke_exact_density(x)).abs() < 1e-15);
        }
        // f_2 = h_2 − h_0/2 with h_2 = (ψ'² − ψψ'')/4
        let psi = |x: f64| (0.5 * hooke_exact_density(x)).sqrt();
        let s = 1e-3;
        for x in [-1.5, 0.0, 0.7, 2.0] {
            let i = m.nodes().iter().position(|v| (v - x).abs() < 1e-12).unwrap();
            let d1 = (psi(x + s) - psi(x - s)) / (2.0 * s);
            let d2 = (psi(x + s) - 2.0 * psi(x) + psi(x - s)) / (s * s);
            let f2 = (d1 * d1 - psi(x) * d2) / 4.0 - 0.5 * psi(x).powi(2);
            assert!((f.coeff(1)[i] - f2).abs() < 1e-6, "x={x}");
        }
    }
}
