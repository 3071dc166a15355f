use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem1d::{
    assemble_advection, assemble_mass, assemble_stiffness, assemble_weighted_mass_sampled, BandedLu, BandedMatrix,
    Mesh1D,
};
use crate::hermite::CoefficientSet;
use crate::jet::factorial;
use crate::potentials::Potential;

/// `1 / ((2l+1)! (−4)^l)`, the weight of `V^{(2l+1)}` in the stationary equation.
pub(crate) fn odd_weight(l: usize) -> f64 {
    1.0 / (factorial(2 * l + 1) * (-4f64).powi(l as i32))
}

/// `2 / ((2l)! (−4)^l)`, the weight of `V^{(2l)}` in the eigenvalue equation.
pub(crate) fn even_weight(l: usize) -> f64 {
    2.0 / (factorial(2 * l) * (-4f64).powi(l as i32))
}

/// Finite-element pieces of the coupled coefficient system for one potential
/// and truncation order.
#[derive(Debug, Clone)]
pub struct CoupledOperator {
    mesh: Arc<Mesh1D>,
    truncation: usize,
    mass: BandedMatrix,
    stiffness: BandedMatrix,
    /// `Aᵀ_ij = ∫ φ_j' φ_i`, the Galerkin form of `d/dx`.
    derivative: BandedMatrix,
    /// `W_m = ∫ V^{(m)} φ_i φ_j`, `m = 0 ..= 2K+1`.
    weighted: Vec<BandedMatrix>,
    basis_integrals: Vec<f64>,
    /// `∫φ_j · V(x_j)`, or `∫ V φ_j` where `V` is singular at the node.
    potential_weights: Vec<f64>,
    /// `Aᵀ` with its first row replaced by `φ(−a) = 0`.
    recon: BandedLu,
}

impl CoupledOperator {
    pub fn new(mesh: Arc<Mesh1D>, potential: &dyn Potential, truncation: usize) -> Result<Self> {
        let max_order = 2 * truncation + 1;
        if let Some(max) = potential.max_order() {
            if max < max_order {
                return Err(Error::DerivativeOrder {
                    name: "potential",
                    order: max_order,
                    max,
                });
            }
        }
        let nq = mesh.tables().xi.len();
        let points = mesh.quadrature_points();
        let mut samples = vec![Vec::with_capacity(points.len()); max_order + 1];
        for (q, &x) in points.iter().enumerate() {
            let d = potential.derivatives(x, max_order)?;
            for (m, v) in d.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteWeight { element: q / nq, x });
                }
                samples[m].push(v);
            }
        }
        let weighted: Vec<BandedMatrix> = samples
            .iter()
            .map(|w| assemble_weighted_mass_sampled(&mesh, w))
            .collect();
        let derivative = assemble_advection(&mesh).transpose();
        let recon = derivative
            .with_identity_rows(&[0])
            .factor()
            .map_err(|e| Error::Reconstruction {
                k: 0,
                source: Box::new(e),
            })?;
        let basis_integrals = mesh.basis_integrals();
        let column_sums = column_sums(&weighted[0]);
        let potential_weights = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, &x)| match potential.value(x) {
                Ok(v) if v.is_finite() => basis_integrals[j] * v,
                _ => column_sums[j],
            })
            .collect();
        Ok(Self {
            mass: assemble_mass(&mesh),
            stiffness: assemble_stiffness(&mesh),
            basis_integrals,
            potential_weights,
            mesh,
            truncation,
            derivative,
            weighted,
            recon,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn mass(&self) -> &BandedMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &BandedMatrix {
        &self.stiffness
    }

    /// `Aᵀ` with `(Aᵀ)_ij = ∫ φ_i φ_j'`.
    pub fn derivative(&self) -> &BandedMatrix {
        &self.derivative
    }

    /// `∫ V^{(m)} φ_i φ_j`.
    pub fn weighted_mass(&self, m: usize) -> &BandedMatrix {
        &self.weighted[m]
    }

    pub fn basis_integrals(&self) -> &[f64] {
        &self.basis_integrals
    }

    /// Nodal quadrature weights of `∫ V f dx`.
    pub fn potential_weights(&self) -> &[f64] {
        &self.potential_weights
    }

    /// Discrete `∫ f dx` of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.basis_integrals.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    fn check(&self, f: &CoefficientSet) -> Result<()> {
        if !f.mesh().same_as(&self.mesh) {
            return Err(Error::DimensionMismatch("coefficient set lives on another mesh".into()));
        }
        if f.truncation() != self.truncation {
            return Err(Error::DimensionMismatch(format!(
                "coefficient set has K = {}, operator has K = {}",
                f.truncation(),
                self.truncation
            )));
        }
        Ok(())
    }

    /// Right-hand side of the weak stationary equation for level `k`:
    /// `−Aᵀφ_k − Σ_l c_l W_{2l+1} φ_{k−l}`.
    fn stationary_source(&self, chain: &[Vec<f64>], k: usize) -> Vec<f64> {
        let mut rhs = self.derivative.matvec(&chain[k]);
        rhs.iter_mut().for_each(|v| *v = -*v);
        let mut tmp = vec![0.0; rhs.len()];
        for l in 0..=k {
            self.weighted[2 * l + 1].matvec_into(&chain[k - l], &mut tmp);
            let c = odd_weight(l);
            rhs.iter_mut().zip(&tmp).for_each(|(r, t)| *r -= c * t);
        }
        rhs
    }

    /// `φ_{k+1}` from `φ_0 … φ_k` by the weak stationary Wigner equation
    /// `(2k+2)Aᵀφ_{k+1} = −Aᵀφ_k − Σ_l c_l W_{2l+1} φ_{k−l}`, `φ_{k+1}(−a) = 0`.
    pub fn reconstruct_next(&self, chain: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
        if k > self.truncation {
            return Err(Error::invalid(
                "k",
                format!(
                    "level {} needs derivatives beyond order {}",
                    k + 1,
                    2 * self.truncation + 1
                ),
            ));
        }
        if chain.len() <= k {
            return Err(Error::DimensionMismatch(format!(
                "chain of length {} cannot build level {}",
                chain.len(),
                k + 1
            )));
        }
        let n = self.mesh.n_basis();
        if let Some(bad) = chain[..=k].iter().position(|c| c.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "chain entry {bad} has the wrong length"
            )));
        }
        let mut rhs = self.stationary_source(chain, k);
        let scale = 1.0 / (2 * k + 2) as f64;
        rhs.iter_mut().for_each(|v| *v *= scale);
        rhs[0] = 0.0;
        self.recon.solve_in_place(&mut rhs);
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Reconstruction {
                k,
                source: Box::new(Error::SingularPivot { row: 0 }),
            });
        }
        Ok(rhs)
    }

    /// Keeps `f_0` and rebuilds `f_2 … f_{2K}` by the reconstruction chain.
    pub fn project_constraint(&self, f: &CoefficientSet) -> Result<CoefficientSet> {
        self.check(f)?;
        let mut chain = vec![f.coeff(0).to_vec()];
        for k in 0..self.truncation {
            let next = self.reconstruct_next(&chain, k)?;
            chain.push(next);
        }
        CoefficientSet::new(self.mesh.clone(), chain)
    }

    /// The lagged closure `φ_{K+1}` of a coefficient set.
    pub fn closure(&self, f: &CoefficientSet) -> Result<Vec<f64>> {
        self.check(f)?;
        self.reconstruct_next(f.coeffs(), self.truncation)
    }

    /// Largest weak-form residual of the stationary equation over levels
    /// `k < K`, together with the boundary values `φ_{k+1}(−a)`.
    pub fn constraint_residual(&self, f: &CoefficientSet) -> Result<f64> {
        self.check(f)?;
        let mut worst: f64 = 0.0;
        for k in 0..self.truncation {
            let src = self.stationary_source(f.coeffs(), k);
            let lhs = self.derivative.matvec(f.coeff(k + 1));
            let c = (2 * k + 2) as f64;
            for i in 1..src.len() {
                worst = worst.max((c * lhs[i] - src[i]).abs());
            }
            worst = worst.max(f.coeff(k + 1)[0].abs());
        }
        Ok(worst)
    }
}

fn column_sums(m: &BandedMatrix) -> Vec<f64> {
    let mut out = vec![0.0; m.dim()];
    for i in 0..m.dim() {
        for j in m.row_columns(i) {
            out[j] += m.get(i, j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::harmonic_coefficients;
    use crate::fem1d::ElementOrder;
    use crate::potentials::{Constant, Harmonic};
    use std::f64::consts::PI;

    fn mesh(h: f64) -> Arc<Mesh1D> {
        Arc::new(Mesh1D::uniform(10.0, h, ElementOrder::Linear).unwrap())
    }

    #[test]
    fn weights() {
        assert_eq!(odd_weight(0), 1.0);
        assert!((odd_weight(1) + 1.0 / 24.0).abs() < 1e-17);
        assert_eq!(even_weight(0), 2.0);
        assert_eq!(even_weight(1), -0.25);
    }

    #[test]
    fn constant_potential_halves_and_flips() {
        let m = mesh(0.1);
        let op = CoupledOperator::new(m.clone(), &Constant(3.0), 2).unwrap();
        let f0 = m.sample(|x| (-x * x).exp());
        let f2 = op.reconstruct_next(&[f0.clone()], 0).unwrap();
        for (a, b) in f2.iter().zip(&f0) {
            assert!((a + 0.5 * b).abs() < 1e-12);
        }
        let zero = op.reconstruct_next(&[vec![0.0; m.n_basis()]], 0).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn harmonic_second_coefficient() {
        // 2f_2' + f_0' + x f_0 = 0 gives f_2 = −e^{−x²}/(4√π)
        let mut errs = Vec::new();
        for h in [0.1, 0.05] {
            let m = mesh(h);
            let op = CoupledOperator::new(m.clone(), &Harmonic::new(1.0).unwrap(), 1).unwrap();
            let f0 = m.sample(|x| (-x * x).exp() / PI.sqrt());
            let f2 = op.reconstruct_next(&[f0], 0).unwrap();
            let exact = m.sample(|x| -(-x * x).exp() / (4.0 * PI.sqrt()));
            errs.push(f2.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        assert!(errs[0] < 1e-3, "{errs:?}");
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.8, "{errs:?}");
    }

    #[test]
    fn projection_is_idempotent_and_solves_constraint() {
        let m = mesh(0.1);
        let op = CoupledOperator::new(m.clone(), &Harmonic::new(1.0).unwrap(), 4).unwrap();
        let f = CoefficientSet::from_fn(m.clone(), 4, |k, x| (-(x - 0.3).powi(2)).exp() * (k + 1) as f64);
        let once = op.project_constraint(&f).unwrap();
        let twice = op.project_constraint(&once).unwrap();
        assert_eq!(once.coeffs(), twice.coeffs());
        assert_eq!(once.coeff(0), f.coeff(0));
        assert!(op.constraint_residual(&once).unwrap() <= 1e-12);
        assert!(op.constraint_residual(&f).unwrap() > 1e-3);
        let zero = op.project_constraint(&CoefficientSet::zeros(m.clone(), 4)).unwrap();
        assert!(zero.coeffs().iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn exact_harmonic_chain_is_nearly_invariant() {
        let mut errs = Vec::new();
        for h in [0.1, 0.05] {
            let m = mesh(h);
            let op = CoupledOperator::new(m.clone(), &Harmonic::new(1.0).unwrap(), 6).unwrap();
            let exact = harmonic_coefficients(m.clone(), 0, 6);
            errs.push(op.project_constraint(&exact).unwrap().max_abs_diff(&exact));
        }
        assert!(errs[0] < 1e-3 && errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn rejects_short_derivative_supply() {
        use crate::potentials::NodalPotential;
        let m = mesh(0.5);
        let v = NodalPotential::new(m.clone(), m.sample(|x| x * x), 2).unwrap();
        assert!(matches!(
            CoupledOperator::new(m, &v, 1),
            Err(Error::DerivativeOrder { order: 3, max: 2, .. })
        ));
    }
}
