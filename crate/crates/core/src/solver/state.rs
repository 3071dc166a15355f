use crate::error::{Error, Result};
use crate::fem1d::BandedMatrix;
use crate::hermite::{overlap, CoefficientSet};

use super::operator::CoupledOperator;

const DEGENERATE_TRACE: f64 = 1e-14;
const COLLAPSE: f64 = 1e-12;

/// Scales every coefficient so that the discrete `∫ f_0 dx = 1`.
pub fn normalize(f: &CoefficientSet) -> Result<CoefficientSet> {
    let t = f.trace();
    if !(t.abs() >= DEGENERATE_TRACE) {
        return Err(Error::DegenerateState(format!("∫f_0 = {t:e}")));
    }
    let mut out = f.clone();
    out.scale(1.0 / t);
    Ok(out)
}

/// Normalization used inside the ITP loop; reports the step on failure.
pub(crate) fn normalize_in_loop(f: &mut CoefficientSet, step: usize) -> Result<()> {
    let t = f.trace();
    if !(t.abs() >= DEGENERATE_TRACE) {
        return Err(Error::DegenerateState(format!("∫f_0 = {t:e} at step {step}")));
    }
    f.scale(1.0 / t);
    Ok(())
}

/// Replaces `f_0` by its even part `(f_0(x) + f_0(−x))/2`. Higher
/// coefficients are left alone.
pub fn symmetrize_even(f: &CoefficientSet) -> CoefficientSet {
    let mut out = f.clone();
    symmetrize_in_place(&mut out);
    out
}

pub(crate) fn symmetrize_in_place(f: &mut CoefficientSet) {
    let mesh = f.mesh().clone();
    let f0 = &mut f.coeffs_mut()[0];
    for i in 0..=mesh.centre_node() {
        let j = mesh.mirror(i);
        let avg = 0.5 * (f0[i] + f0[j]);
        f0[i] = avg;
        f0[j] = avg;
    }
}

/// Modified Gram–Schmidt under the phase-space overlap, lowest state first.
pub fn orthogonalize(states: &[CoefficientSet], mass: &BandedMatrix) -> Result<Vec<CoefficientSet>> {
    let mut out: Vec<CoefficientSet> = Vec::with_capacity(states.len());
    let mut norms: Vec<f64> = Vec::with_capacity(states.len());
    for (index, s) in states.iter().enumerate() {
        let before = overlap(s, s, mass)?;
        if !(before > 0.0) {
            return Err(Error::RankDeficient { index });
        }
        let mut v = s.clone();
        for (u, nu) in out.iter().zip(&norms) {
            let c = overlap(u, &v, mass)? / nu;
            v.axpy(-c, u);
        }
        let after = overlap(&v, &v, mass)?;
        if !(after > 0.0) || after.sqrt() < COLLAPSE * before.sqrt() {
            return Err(Error::RankDeficient { index });
        }
        norms.push(after);
        out.push(v);
    }
    Ok(out)
}

/// `E = ∫ [(2f_2 + f_0)/2 + V f_0] dx` for a normalized state, integrated
/// with the nodal quadrature `∫ g ≈ Σ_j g(x_j) ∫φ_j` of the element basis.
pub fn compute_energy(op: &CoupledOperator, f: &CoefficientSet) -> Result<f64> {
    if f.truncation() == 0 {
        return Err(Error::EnergyUnavailable);
    }
    Ok(moment_energy(op, f.coeff(0), f.coeff(1)))
}

/// As [`compute_energy`], taking `f_2` from the reconstruction chain when
/// `K = 0`.
pub fn energy_with_closure(op: &CoupledOperator, f: &CoefficientSet) -> Result<f64> {
    if f.truncation() > 0 {
        return compute_energy(op, f);
    }
    let f2 = op.closure(f)?;
    Ok(moment_energy(op, f.coeff(0), &f2))
}

fn moment_energy(op: &CoupledOperator, f0: &[f64], f2: &[f64]) -> f64 {
    let potential: f64 = op.potential_weights().iter().zip(f0).map(|(w, f)| w * f).sum();
    op.integrate(f2) + 0.5 * op.integrate(f0) + potential
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{harmonic_coefficients, hydrogen_coefficients};
    use crate::fem1d::{assemble_mass, ElementOrder, Mesh1D};
    use crate::potentials::{Harmonic, Hydrogen1d};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn mesh(h: f64) -> Arc<Mesh1D> {
        Arc::new(Mesh1D::uniform(10.0, h, ElementOrder::Linear).unwrap())
    }

    #[test]
    fn normalization() {
        let m = mesh(0.05);
        let f = CoefficientSet::from_fn(m.clone(), 2, |k, x| (-x * x).exp() * (k + 1) as f64);
        let g = normalize(&f).unwrap();
        assert!((g.trace() - 1.0).abs() < 1e-15);
        assert!((g.coeff(0)[m.centre_node()] - 1.0 / PI.sqrt()).abs() < 1e-6);
        let again = normalize(&g).unwrap();
        let size = g.coeff(2)[m.centre_node()];
        assert!(again.max_abs_diff(&g) < 1e-15 * size);
        let mut big = f.clone();
        big.scale(7.0);
        assert!(normalize(&big).unwrap().max_abs_diff(&g) < 1e-15 * size);
        assert!(matches!(
            normalize(&CoefficientSet::zeros(m, 1)),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn symmetrization() {
        let m = mesh(0.5);
        let even = CoefficientSet::from_fn(m.clone(), 1, |_, x| x * x + 1.0);
        assert_eq!(symmetrize_even(&even).coeffs(), even.coeffs());
        let odd = CoefficientSet::from_fn(m.clone(), 1, |_, x| x.powi(3));
        assert!(symmetrize_even(&odd).coeff(0).iter().all(|v| *v == 0.0));
        let mixed = CoefficientSet::from_fn(m.clone(), 1, |_, x| x + x * x);
        let s = symmetrize_even(&mixed);
        for (v, x) in s.coeff(0).iter().zip(m.nodes()) {
            assert!((v - x * x).abs() < 1e-14);
        }
        assert_eq!(s.coeff(1), mixed.coeff(1));
    }

    #[test]
    fn gram_schmidt_recovers_excited_state() {
        let m = mesh(0.05);
        let mass = assemble_mass(&m);
        let g = harmonic_coefficients(m.clone(), 0, 12);
        let e = harmonic_coefficients(m.clone(), 1, 12);
        let mut mix = g.clone();
        mix.axpy(0.5, &e);
        let out = orthogonalize(&[g.clone(), mix], &mass).unwrap();
        assert_eq!(out[0].coeffs(), g.coeffs());
        let o = overlap(&out[0], &out[1], &mass).unwrap();
        assert!(o.abs() < 1e-12);
        // the remainder is 0.5·e up to the exact states' discrete overlap
        let mut d = out[1].clone();
        d.axpy(-0.5, &e);
        assert!(d.max_abs_diff(&CoefficientSet::zeros(m.clone(), 12)) < 1e-3);
        assert!(matches!(
            orthogonalize(&[g.clone(), g.clone()], &mass),
            Err(Error::RankDeficient { index: 1 })
        ));
        assert_eq!(orthogonalize(&[g.clone()], &mass).unwrap()[0].coeffs(), g.coeffs());
    }

    #[test]
    fn exact_state_energies() {
        let m = mesh(0.05);
        let op = CoupledOperator::new(m.clone(), &Harmonic::new(1.0).unwrap(), 2).unwrap();
        let g = harmonic_coefficients(m.clone(), 0, 2);
        assert!((compute_energy(&op, &g).unwrap() - 0.5).abs() < 1e-6);
        let e = harmonic_coefficients(m.clone(), 1, 2);
        assert!((compute_energy(&op, &e).unwrap() - 1.5).abs() < 1e-5);
        let m2 = Arc::new(Mesh1D::uniform(10.0, 0.05, ElementOrder::Quadratic).unwrap());
        let op2 = CoupledOperator::new(m2.clone(), &Harmonic::new(1.0).unwrap(), 2).unwrap();
        let g = harmonic_coefficients(m2.clone(), 0, 2);
        assert!((compute_energy(&op2, &g).unwrap() - 0.5).abs() < 1e-6);
        let e = harmonic_coefficients(m2.clone(), 1, 2);
        assert!((compute_energy(&op2, &e).unwrap() - 1.5).abs() < 1e-5);
        let op0 = CoupledOperator::new(m.clone(), &Harmonic::new(1.0).unwrap(), 0).unwrap();
        let g0 = harmonic_coefficients(m.clone(), 0, 0);
        assert!(matches!(compute_energy(&op0, &g0), Err(Error::EnergyUnavailable)));
        assert!((energy_with_closure(&op0, &g0).unwrap() - 0.5).abs() < 1e-3);

        let mq = Arc::new(Mesh1D::uniform(10.0, 0.05, ElementOrder::Quadratic).unwrap());
        let op = CoupledOperator::new(mq.clone(), &Hydrogen1d, 1).unwrap();
        let hyd = hydrogen_coefficients(mq, 1);
        assert!((compute_energy(&op, &hyd).unwrap() + 0.5).abs() < 1e-2);
    }
}
