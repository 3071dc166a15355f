use std::sync::Arc;

use proptest::prelude::*;
use wigner_core::fem1d::{assemble_mass, ElementOrder, Mesh1D};
use wigner_core::potentials::dft::{
    hxc_potential, lda_vxc, scf_solve, total_energy, KsEigensolver, LdaConstants, ScfConfig,
};
use wigner_core::potentials::{hooke_exact_density, Harmonic};
use wigner_core::schrodinger::SchrodingerKs;

/// Exchange plus correlation energy per unit length of a uniform density.
fn exc_density(rho: f64) -> f64 {
    -0.25 * rho * rho + LdaConstants::default().energy_density(rho)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn lda_potential_is_the_functional_derivative(rho in 1e-3f64..2.0) {
        let step = 1e-5 * rho.max(0.01);
        let fd = (exc_density(rho + step) - exc_density(rho - step)) / (2.0 * step);
        let (vx, vc) = lda_vxc(&[rho]).unwrap();
        prop_assert!((vx[0] + vc[0] - fd).abs() <= 1e-7, "rho={} v={} fd={}", rho, vx[0] + vc[0], fd);
    }
}

/// `2∫|Ψ(x, y)|² dy` for the closed-form Coulomb Hooke ground state, by a
/// brute-force trapezoid sum in `y` normalized over the plane.
#[test]
fn hooke_density_is_two_body_marginal() {
    let psi = |x: f64, y: f64| (0.5 * (x - y).abs() + 1.0) * (x - y) * (-(x * x + y * y) / 4.0).exp();
    let (l, n) = (14.0, 2801);
    let dy = 2.0 * l / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| -l + i as f64 * dy).collect();
    let marginal = |x: f64| grid.iter().map(|y| psi(x, *y).powi(2)).sum::<f64>() * dy;
    let norm: f64 = grid.iter().map(|x| marginal(*x)).sum::<f64>() * dy;
    for x in [-3.0, -1.7, -0.4, 0.0, 0.25, 1.1, 2.6, 4.0] {
        let want = 2.0 * marginal(x) / norm;
        let got = hooke_exact_density(x);
        assert!((got - want).abs() < 1e-6, "x={x}: {got} vs {want}");
    }
}

#[test]
fn scf_energy_is_stationary() {
    let mesh = Arc::new(Mesh1D::uniform(8.0, 0.1, ElementOrder::Linear).unwrap());
    let external = Arc::new(Harmonic::new(1.0).unwrap());
    let mut ks = SchrodingerKs::new(mesh.clone(), external);
    let config = ScfConfig::default();
    let state = scf_solve(&mut ks, &config).unwrap();
    assert!(state.converged);
    let energies: Vec<f64> = state.history.iter().map(|r| r.energy).collect();
    assert!(energies.len() > 5);

    let (vh, vx, vc) = hxc_potential(&state.density, true).unwrap();
    let v: Vec<f64> = (0..vh.len()).map(|i| vh[i] + vx[i] + vc[i]).collect();
    let again = ks.solve(&v).unwrap();
    let e = total_energy(&mesh, again.epsilon, &state.density).unwrap();
    assert!((e - state.energy).abs() <= 10.0 * config.tol, "{e} vs {}", state.energy);
    let psi = ks.orbital().unwrap();
    let norm: f64 = assemble_mass(&mesh)
        .matvec(psi)
        .iter()
        .zip(psi)
        .map(|(a, b)| a * b)
        .sum();
    assert!((2.0 * norm - 2.0).abs() < 1e-10);
}

#[test]
fn interaction_off_is_twice_the_oscillator_level() {
    let mesh = Arc::new(Mesh1D::uniform(8.0, 0.05, ElementOrder::Quadratic).unwrap());
    let mut ks = SchrodingerKs::new(mesh, Arc::new(Harmonic::new(1.0).unwrap()));
    let state = scf_solve(
        &mut ks,
        &ScfConfig {
            interacting: false,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(state.converged);
    assert_eq!(state.iterations(), 1);
    assert!((state.energy - 1.0).abs() < 1e-6, "{}", state.energy);
    assert!(state.v_h.iter().chain(&state.v_x).chain(&state.v_c).all(|v| *v == 0.0));
}
