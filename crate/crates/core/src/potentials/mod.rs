//! Scalar potentials with pointwise derivatives, the exact Hooke's-atom
//! quantities, and the contact-interaction DFT layer.

pub mod dft;
mod hooke;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fd::nodal_derivative;
use crate::fem1d::Mesh1D;
use crate::jet::factorial;

pub use hooke::{hooke_exact_density, hooke_exact_density_jet, HookeKs};

/// A potential `V(x)` with derivatives `∂^m V / ∂x^m`.
pub trait Potential: fmt::Debug + Send + Sync {
    fn derivative(&self, x: f64, m: usize) -> Result<f64>;

    /// `[V(x), V'(x), …, V^{(max_order)}(x)]`.
    fn derivatives(&self, x: f64, max_order: usize) -> Result<Vec<f64>> {
        (0..=max_order).map(|m| self.derivative(x, m)).collect()
    }

    fn value(&self, x: f64) -> Result<f64> {
        self.derivative(x, 0)
    }

    /// Highest available derivative order, if limited.
    fn max_order(&self) -> Option<usize> {
        None
    }

    /// Short name used in manifests and messages.
    fn name(&self) -> &str;
}

/// `V = ω² x² / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub omega: f64,
}

impl Harmonic {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be positive, got {omega}")));
        }
        Ok(Self { omega })
    }
}

impl Potential for Harmonic {
    fn derivative(&self, x: f64, m: usize) -> Result<f64> {
        let w2 = self.omega * self.omega;
        Ok(match m {
            0 => 0.5 * w2 * x * x,
            1 => w2 * x,
            2 => w2,
            _ => 0.0,
        })
    }

    fn name(&self) -> &str {
        "harmonic"
    }
}

/// `V = −1/|x|`, undefined at the origin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Hydrogen1d;

impl Potential for Hydrogen1d {
    fn derivative(&self, x: f64, m: usize) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::SingularPotential { name: "hydrogen1d", x });
        }
        let r = x.abs();
        let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
        // −(−1)^m m! r^{−(m+1)} on x > 0; V even, so odd orders flip for x < 0
        let v = -sign_m * factorial(m) * r.powi(-(m as i32 + 1));
        Ok(if x < 0.0 { sign_m * v } else { v })
    }

    fn name(&self) -> &str {
        "hydrogen1d"
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Constant(pub f64);

impl Potential for Constant {
    fn derivative(&self, _x: f64, m: usize) -> Result<f64> {
        Ok(if m == 0 { self.0 } else { 0.0 })
    }

    fn name(&self) -> &str {
        "constant"
    }
}

/// Potential known at mesh nodes. Derivatives are fourth-order finite
/// differences of the nodal values; every order is interpolated with the
/// mesh's FEM basis.
#[derive(Debug, Clone)]
pub struct NodalPotential {
    mesh: Arc<Mesh1D>,
    derivs: Vec<Vec<f64>>,
}

impl NodalPotential {
    pub fn new(mesh: Arc<Mesh1D>, values: Vec<f64>, max_order: usize) -> Result<Self> {
        mesh.check_len(&values)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite value at node {i}")));
        }
        let dx = mesh.node_spacing();
        let mut derivs = Vec::with_capacity(max_order + 1);
        for m in 1..=max_order {
            derivs.push(nodal_derivative(&values, dx, m));
        }
        derivs.insert(0, values);
        Ok(Self { mesh, derivs })
    }

    pub fn values(&self) -> &[f64] {
        &self.derivs[0]
    }

    pub fn nodal_derivative(&self, m: usize) -> &[f64] {
        &self.derivs[m]
    }
}

impl Potential for NodalPotential {
    fn derivative(&self, x: f64, m: usize) -> Result<f64> {
        let v = self.derivs.get(m).ok_or(Error::DerivativeOrder {
            name: "nodal",
            order: m,
            max: self.derivs.len() - 1,
        })?;
        self.mesh.interpolate(v, x)
    }

    fn max_order(&self) -> Option<usize> {
        Some(self.derivs.len() - 1)
    }

    fn name(&self) -> &str {
        "nodal"
    }
}

/// Pointwise sum of potentials.
#[derive(Debug, Clone)]
pub struct SumPotential {
    parts: Vec<Arc<dyn Potential>>,
}

impl SumPotential {
    pub fn new(parts: Vec<Arc<dyn Potential>>) -> Self {
        Self { parts }
    }
}

impl Potential for SumPotential {
    fn derivative(&self, x: f64, m: usize) -> Result<f64> {
        self.parts.iter().map(|p| p.derivative(x, m)).sum()
    }

    fn derivatives(&self, x: f64, max_order: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; max_order + 1];
        for p in &self.parts {
            for (o, v) in out.iter_mut().zip(p.derivatives(x, max_order)?) {
                *o += v;
            }
        }
        Ok(out)
    }

    fn max_order(&self) -> Option<usize> {
        self.parts.iter().filter_map(|p| p.max_order()).min()
    }

    fn name(&self) -> &str {
        "sum"
    }
}
