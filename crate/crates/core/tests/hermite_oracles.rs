mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use wigner_core::exact::harmonic_coefficients;
use wigner_core::fem1d::{assemble_mass, ElementOrder, Mesh1D};
use wigner_core::hermite::{
    c_alpha, evaluate_wigner, f_from_h, h_from_f, overlap, reconstruct_wavefunction, CoefficientSet,
};

fn mesh(a: f64, h: f64, order: ElementOrder) -> Arc<Mesh1D> {
    Arc::new(Mesh1D::uniform(a, h, order).unwrap())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn c_alpha_matches_gauss_hermite() {
    let rule = common::hermite(30);
    for n in 0..=12 {
        let q: f64 = rule.iter().map(|(p, w)| w * common::he(n, *p)).sum();
        let c = c_alpha(n);
        if n % 2 == 1 {
            assert!(c == 0.0 && q.abs() < 1e-10, "n={n}: {q}");
        } else {
            assert!(((c - q) / q).abs() < 1e-10, "n={n}: {c} vs {q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moment_maps_are_inverse(
        truncation in 0usize..12,
        values in prop::collection::vec(-1.0f64..1.0, 13 * 9),
    ) {
        let m = mesh(2.0, 0.5, ElementOrder::Linear);
        let n = m.n_basis();
        let coeffs: Vec<Vec<f64>> = (0..=truncation).map(|k| values[k * n..(k + 1) * n].to_vec()).collect();
        let f = CoefficientSet::new(m.clone(), coeffs).unwrap();
        let back = f_from_h(m.clone(), &h_from_f(&f)).unwrap();
        prop_assert!(back.max_abs_diff(&f) <= 1e-13);
        let h: Vec<Vec<f64>> = f.coeffs().to_vec();
        let again = h_from_f(&f_from_h(m, &h).unwrap());
        for (a, b) in again.iter().zip(&h) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn expansion_is_even_in_momentum(x in -4.0f64..4.0, p in 0.0f64..6.0, k in 0usize..10) {
        let m = mesh(5.0, 0.25, ElementOrder::Quadratic);
        let f = harmonic_coefficients(m, 1, k);
        prop_assert_eq!(evaluate_wigner(&f, x, p).unwrap(), evaluate_wigner(&f, x, -p).unwrap());
    }
}

#[test]
fn harmonic_ground_coefficients_closed_form() {
    let m = mesh(6.0, 0.1, ElementOrder::Linear);
    let f = harmonic_coefficients(m.clone(), 0, 10);
    for k in 0..=10 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let scale = sign / (PI.sqrt() * 4f64.powi(k as i32) * factorial(k));
        for (x, v) in m.nodes().iter().zip(f.coeff(k)) {
            let want = (-x * x).exp() * scale;
            assert!(
                (v - want).abs() <= 1e-14 * scale.abs().max(1e-300) + 1e-300,
                "k={k} x={x}"
            );
        }
    }
}

/// The Hermite series of `e^{−x²−p²}/π` converges like `Σ_{k>K} C(2k,k)/8^k`;
/// at `K = 30` the remaining tail is negligible on `|p| ≤ 2`.
#[test]
fn evaluate_wigner_reproduces_ground_state() {
    let m = mesh(6.0, 0.25, ElementOrder::Linear);
    let f = harmonic_coefficients(m.clone(), 0, 30);
    let mut worst: f64 = 0.0;
    for &x in m.nodes().iter().filter(|x| x.abs() <= 2.0) {
        for i in 0..=40 {
            let p = -2.0 + 0.1 * i as f64;
            let exact = (-x * x - p * p).exp() / PI;
            worst = worst.max((evaluate_wigner(&f, x, p).unwrap() - exact).abs());
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

/// `overlap = 2π ∬ f² dx dp`, with the x integral taken over the FEM
/// interpolants and the p integral by Gauss–Hermite.
#[test]
fn overlap_matches_phase_space_quadrature() {
    let m = mesh(6.0, 0.2, ElementOrder::Linear);
    let mass = assemble_mass(&m);
    let gh = common::hermite(40);
    let gl = common::legendre(6);
    for k in [6usize, 8, 10] {
        let f = harmonic_coefficients(m.clone(), 0, k);
        // f(x,p) = e^{−p²/2}/√(2π) g(x,p), so f² = e^{−p²} g² / (2π)
        let mut oracle = 0.0;
        for e in 0..m.n_elements() {
            let (lo, hi) = m.element_bounds(e);
            for (xi, wx) in &gl {
                let x = lo + 0.5 * (hi - lo) * (xi + 1.0);
                let vals: Vec<f64> = f.coeffs().iter().map(|c| m.interpolate(c, x).unwrap()).collect();
                for (p, wp) in &gh {
                    let g: f64 = vals.iter().enumerate().map(|(j, v)| v * common::he(2 * j, *p)).sum();
                    oracle += 0.5 * (hi - lo) * wx * wp * g * g / (2.0 * PI);
                }
            }
        }
        let o = overlap(&f, &f, &mass).unwrap();
        assert!(
            (o - 2.0 * PI * oracle).abs() < 1e-6,
            "K={k}: {o} vs {}",
            2.0 * PI * oracle
        );
    }
}

#[test]
fn wavefunction_recovered_from_exact_coefficients() {
    let m = mesh(10.0, 0.05, ElementOrder::Quadratic);
    let f = harmonic_coefficients(m.clone(), 0, 12);
    let psi0 = PI.powf(-0.25);
    let psi = reconstruct_wavefunction(&f, 0.0, psi0).unwrap();
    for (x, v) in m.nodes().iter().zip(&psi) {
        if x.abs() <= 3.0 {
            assert!((v - psi0 * (-0.5 * x * x).exp()).abs() < 1e-4, "x={x}");
        }
    }
}
