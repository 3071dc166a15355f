//! Hermite-in-momentum representation of a Wigner function:
//!
//! `f(x, p) = Σ_k f_{2k}(x) · (2π)^{-1/2} e^{-p²/2} He_{2k}(p)`.
//!
//! Only even Hermite degrees are stored. Every factor `(2i)^{2l}` of the
//! one-dimensional equations is the real number `(-4)^l`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd::nodal_derivative;
use crate::fem1d::{BandedMatrix, Mesh1D};
use crate::jet::factorial;

/// Nodal values of `f_0, f_2, …, f_{2K}` on a shared mesh.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    mesh: Arc<Mesh1D>,
    coeffs: Vec<Vec<f64>>,
}

impl CoefficientSet {
    pub fn new(mesh: Arc<Mesh1D>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("coeffs", "at least f_0 is required"));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.len() != mesh.n_basis() {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient {k} has {} values, mesh has {} basis functions",
                    c.len(),
                    mesh.n_basis()
                )));
            }
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn zeros(mesh: Arc<Mesh1D>, truncation: usize) -> Self {
        let n = mesh.n_basis();
        Self {
            mesh,
            coeffs: vec![vec![0.0; n]; truncation + 1],
        }
    }

    /// Samples `f(k, x)` at the mesh nodes for `k = 0..=K`.
    pub fn from_fn<F: Fn(usize, f64) -> f64>(mesh: Arc<Mesh1D>, truncation: usize, f: F) -> Self {
        let coeffs = (0..=truncation)
            .map(|k| mesh.nodes().iter().map(|&x| f(k, x)).collect())
            .collect();
        Self { mesh, coeffs }
    }

    /// Truncation index `K`.
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Vec<f64>> {
        self.coeffs
    }

    /// Nodal values of `f_{2k}`.
    pub fn coeff(&self, k: usize) -> &[f64] {
        &self.coeffs[k]
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            c.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &CoefficientSet) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
        }
    }

    /// Same mesh and truncation.
    pub fn compatible(&self, other: &CoefficientSet) -> bool {
        self.coeffs.len() == other.coeffs.len() && self.mesh.same_as(&other.mesh)
    }

    fn check_compatible(&self, other: &CoefficientSet) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "coefficient sets differ: K = {} vs {} or different meshes",
                self.truncation(),
                other.truncation()
            )))
        }
    }

    /// `max_k ‖f_{2k} − g_{2k}‖∞` over the nodes.
    pub fn max_abs_diff(&self, other: &CoefficientSet) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Discrete `∫ f_0 dx`.
    pub fn trace(&self) -> f64 {
        self.mesh.integrate(&self.coeffs[0])
    }
}

/// Probabilists' Hermite polynomials by three-term recursion.
#[derive(Debug, Clone, Copy)]
pub struct HermiteTable {
    max_degree: usize,
}

impl HermiteTable {
    pub fn new(max_degree: usize) -> Self {
        Self { max_degree }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `[He_0(p), …, He_n(p)]`.
    pub fn evaluate(&self, p: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.max_degree + 1);
        out.push(1.0);
        if self.max_degree >= 1 {
            out.push(p);
        }
        for n in 1..self.max_degree {
            out.push(p * out[n] - n as f64 * out[n - 1]);
        }
        out
    }

    pub fn value(&self, n: usize, p: f64) -> f64 {
        assert!(n <= self.max_degree);
        Self::new(n).evaluate(p)[n]
    }
}

/// `C_n = ∫ He_n(p) e^{-p²} dp`: zero for odd `n`, otherwise
/// `√π (−1/4)^{n/2} n!/(n/2)!`.
pub fn c_alpha(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    // C_{2m+2} / C_{2m} = −(2m+1)/2
    (0..n / 2).fold(std::f64::consts::PI.sqrt(), |c, m| -c * (2 * m + 1) as f64 / 2.0)
}

/// Phase-space inner product `Σ_{k,l} C_{2k+2l} a_kᵀ M b_l`, which equals
/// `2π ∬ f_a f_b dx dp`.
pub fn overlap(fa: &CoefficientSet, fb: &CoefficientSet, mass: &BandedMatrix) -> Result<f64> {
    fa.check_compatible(fb)?;
    if mass.dim() != fa.mesh.n_basis() {
        return Err(Error::DimensionMismatch(format!(
            "mass matrix has dimension {}, mesh has {} basis functions",
            mass.dim(),
            fa.mesh.n_basis()
        )));
    }
    let mb: Vec<Vec<f64>> = fb.coeffs.iter().map(|b| mass.matvec(b)).collect();
    let mut total = 0.0;
    for (k, a) in fa.coeffs.iter().enumerate() {
        for (l, b) in mb.iter().enumerate() {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            total += c_alpha(2 * k + 2 * l) * dot;
        }
    }
    Ok(total)
}

/// Momentum moments `h_{2k} = (1/(2k)!) ∫ p^{2k} f dp = Σ_j f_{2k−2j} / (2^j j!)`.
pub fn h_from_f(f: &CoefficientSet) -> Vec<Vec<f64>> {
    triangular_map(&f.coeffs, 1.0)
}

/// Inverse of [`h_from_f`]: `f_{2k} = Σ_j (−1)^j h_{2k−2j} / (2^j j!)`.
pub fn f_from_h(mesh: Arc<Mesh1D>, h: &[Vec<f64>]) -> Result<CoefficientSet> {
    CoefficientSet::new(mesh, triangular_map(h, -1.0))
}

fn triangular_map(input: &[Vec<f64>], sign: f64) -> Vec<Vec<f64>> {
    let n = input.first().map_or(0, Vec::len);
    (0..input.len())
        .map(|k| {
            let mut out = vec![0.0; n];
            let mut w = 1.0;
            for j in 0..=k {
                if j > 0 {
                    w *= sign / (2.0 * j as f64);
                }
                out.iter_mut().zip(&input[k - j]).for_each(|(o, v)| *o += w * v);
            }
            out
        })
        .collect()
}

/// `h_{2k}` at one point from the derivatives `d[j] = ψ^{(j)}`, `j ≤ 2k`, of
/// a real wavefunction: `1/((2k)!(−4)^k) Σ_β (−1)^β C(2k, β) ψ^{(β)} ψ^{(2k−β)}`.
pub fn h_from_derivatives(d: &[f64], k: usize) -> f64 {
    let n = 2 * k;
    assert!(d.len() > n, "need derivatives up to order {n}");
    let mut binom = 1.0;
    let mut sum = 0.0;
    for beta in 0..=n {
        if beta > 0 {
            binom = binom * (n - beta + 1) as f64 / beta as f64;
        }
        let sign = if beta % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * d[beta] * d[n - beta];
    }
    sum / (factorial(n) * (-4f64).powi(k as i32))
}

/// `h_{2k}` at the nodes of a sampled real wavefunction, with derivatives from
/// fourth-order finite differences on the node spacing.
pub fn h_from_wavefunction(mesh: &Mesh1D, psi: &[f64], k: usize) -> Result<Vec<f64>> {
    mesh.check_len(psi)?;
    let order = 2 * k;
    if psi.len() < order + 4 {
        return Err(Error::invalid(
            "k",
            format!("{} nodes cannot resolve derivative order {order}", psi.len()),
        ));
    }
    let dx = mesh.node_spacing();
    let derivs: Vec<Vec<f64>> = (0..=order).map(|m| nodal_derivative(psi, dx, m)).collect();
    Ok((0..psi.len())
        .map(|i| {
            let d: Vec<f64> = derivs.iter().map(|v| v[i]).collect();
            h_from_derivatives(&d, k)
        })
        .collect())
}

/// Coefficient set `f_0 … f_{2K}` of a sampled real wavefunction.
pub fn coefficients_from_wavefunction(mesh: Arc<Mesh1D>, psi: &[f64], truncation: usize) -> Result<CoefficientSet> {
    let h = (0..=truncation)
        .map(|k| h_from_wavefunction(&mesh, psi, k))
        .collect::<Result<Vec<_>>>()?;
    f_from_h(mesh, &h)
}

/// `f(x, p)` with the coefficient functions interpolated by the FEM basis.
pub fn evaluate_wigner(f: &CoefficientSet, x: f64, p: f64) -> Result<f64> {
    let he = HermiteTable::new(2 * f.truncation()).evaluate(p.abs());
    let gauss = (-0.5 * p * p).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = 0.0;
    for (k, c) in f.coeffs.iter().enumerate() {
        sum += f.mesh.interpolate(c, x)? * he[2 * k];
    }
    Ok(sum * gauss)
}

/// Pure-state wavefunction at the nodes from its Wigner coefficients,
/// anchored at `ψ(x0) = psi0`:
/// `ψ(x) = e^{−(x−x0)²/2}/psi0 · Σ_k f_{2k}((x+x0)/2) (−1)^k (x−x0)^{2k}`.
pub fn reconstruct_wavefunction(f: &CoefficientSet, x0: f64, psi0: f64) -> Result<Vec<f64>> {
    if psi0 == 0.0 || !psi0.is_finite() {
        return Err(Error::invalid("psi0", "anchor value must be finite and nonzero"));
    }
    let mesh = &f.mesh;
    mesh.locate(x0)?;
    mesh.nodes()
        .iter()
        .map(|&x| {
            let mid = 0.5 * (x + x0);
            let d2 = (x - x0) * (x - x0);
            let mut term = 1.0;
            let mut sum = 0.0;
            for c in &f.coeffs {
                sum += mesh.interpolate(c, mid)? * term;
                term *= -d2;
            }
            Ok((-0.5 * d2).exp() / psi0 * sum)
        })
        .collect()
}
