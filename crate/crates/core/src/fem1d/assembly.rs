use super::banded::BandedMatrix;
use super::mesh::Mesh1D;
use crate::error::{Error, Result};

/// Element loop shared by every assembly routine. `kernel(value, deriv,
/// weight, a, b)` receives shape values and physical derivatives at one
/// quadrature point together with `w · |J| · weight(x)`.
fn assemble<K>(mesh: &Mesh1D, weights: Option<&[f64]>, kernel: K) -> BandedMatrix
where
    K: Fn(&[f64; 3], &[f64; 3], f64, usize, usize) -> f64,
{
    let p = mesh.order().degree();
    let n = mesh.n_basis();
    let mut mat = BandedMatrix::zeros(n, p, p);
    let t = mesh.tables();
    let jac = 0.5 * mesh.element_size();
    let inv_jac = 1.0 / jac;
    let nq = t.xi.len();
    for e in 0..mesh.n_elements() {
        let base = p * e;
        let mut local = [[0.0; 3]; 3];
        for q in 0..nq {
            let scale = t.weight[q] * jac * weights.map_or(1.0, |w| w[e * nq + q]);
            if scale == 0.0 {
                continue;
            }
            let d = [
                t.deriv[q][0] * inv_jac,
                t.deriv[q][1] * inv_jac,
                t.deriv[q][2] * inv_jac,
            ];
            for (a, row) in local.iter_mut().enumerate().take(p + 1) {
                for (b, entry) in row.iter_mut().enumerate().take(p + 1) {
                    *entry += kernel(&t.value[q], &d, scale, a, b);
                }
            }
        }
        for (a, row) in local.iter().enumerate().take(p + 1) {
            for (b, &v) in row.iter().enumerate().take(p + 1) {
                mat.add(base + a, base + b, v);
            }
        }
    }
    mat
}

/// `M_ij = ∫ φ_i φ_j dx`.
pub fn assemble_mass(mesh: &Mesh1D) -> BandedMatrix {
    assemble(mesh, None, |v, _, s, a, b| s * v[a] * v[b])
}

/// `S_ij = ∫ φ_i' φ_j' dx`, with no boundary conditions applied.
pub fn assemble_stiffness(mesh: &Mesh1D) -> BandedMatrix {
    assemble(mesh, None, |_, d, s, a, b| s * d[a] * d[b])
}

/// `A_ij = ∫ φ_i' φ_j dx`.
pub fn assemble_advection(mesh: &Mesh1D) -> BandedMatrix {
    assemble(mesh, None, |v, d, s, a, b| s * d[a] * v[b])
}

/// `M^w_ij = ∫ w(x) φ_i φ_j dx`, with `w` sampled at the quadrature points.
pub fn assemble_weighted_mass<W>(mesh: &Mesh1D, w: W) -> Result<BandedMatrix>
where
    W: Fn(f64) -> Result<f64>,
{
    let nq = mesh.tables().xi.len();
    let xs = mesh.quadrature_points();
    let mut weights = Vec::with_capacity(xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let element = k / nq;
        let v = w(x).map_err(|_| Error::NonFiniteWeight { element, x })?;
        if !v.is_finite() {
            return Err(Error::NonFiniteWeight { element, x });
        }
        weights.push(v);
    }
    Ok(assemble_weighted_mass_sampled(mesh, &weights))
}

/// Weighted mass matrix from weights already sampled at
/// [`Mesh1D::quadrature_points`].
pub fn assemble_weighted_mass_sampled(mesh: &Mesh1D, weights: &[f64]) -> BandedMatrix {
    assert_eq!(weights.len(), mesh.n_elements() * mesh.tables().xi.len());
    assemble(mesh, Some(weights), |v, _, s, a, b| s * v[a] * v[b])
}
