use std::fmt;

use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};

/// Default Gauss–Legendre points per element.
pub const DEFAULT_QUAD_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementOrder {
    Linear,
    Quadratic,
}

impl ElementOrder {
    pub fn from_degree(p: usize) -> Result<Self> {
        match p {
            1 => Ok(ElementOrder::Linear),
            2 => Ok(ElementOrder::Quadratic),
            _ => Err(Error::invalid("order", format!("element order {p} is not 1 or 2"))),
        }
    }

    pub fn degree(self) -> usize {
        match self {
            ElementOrder::Linear => 1,
            ElementOrder::Quadratic => 2,
        }
    }

    /// Shape functions on the reference element [-1, 1].
    pub fn shape(self, xi: f64, out: &mut [f64]) {
        match self {
            ElementOrder::Linear => {
                out[0] = 0.5 * (1.0 - xi);
                out[1] = 0.5 * (1.0 + xi);
            }
            ElementOrder::Quadratic => {
                out[0] = 0.5 * xi * (xi - 1.0);
                out[1] = 1.0 - xi * xi;
                out[2] = 0.5 * xi * (xi + 1.0);
            }
        }
    }

    /// Reference-coordinate derivatives of the shape functions.
    pub fn shape_derivative(self, xi: f64, out: &mut [f64]) {
        match self {
            ElementOrder::Linear => {
                out[0] = -0.5;
                out[1] = 0.5;
            }
            ElementOrder::Quadratic => {
                out[0] = xi - 0.5;
                out[1] = -2.0 * xi;
                out[2] = xi + 0.5;
            }
        }
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.degree())
    }
}

/// Shape-function tables at the quadrature points of the reference element.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTables {
    pub xi: Vec<f64>,
    pub weight: Vec<f64>,
    /// `value[q][a]`
    pub value: Vec<[f64; 3]>,
    /// `deriv[q][a]`, with respect to the reference coordinate
    pub deriv: Vec<[f64; 3]>,
}

/// Uniform mesh of `[-a, a]` with Lagrange elements of order 1 or 2.
///
/// The number of elements is always even so that `x = 0` is a node and the
/// node set is mirror symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    half_width: f64,
    element_size: f64,
    n_elements: usize,
    order: ElementOrder,
    nodes: Vec<f64>,
    quadrature: QuadratureRule,
    tables: ReferenceTables,
}

impl Mesh1D {
    pub fn uniform(a: f64, h: f64, order: ElementOrder) -> Result<Self> {
        Self::with_quadrature(a, h, order, DEFAULT_QUAD_POINTS)
    }

    pub fn with_quadrature(a: f64, h: f64, order: ElementOrder, quad_points: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid("a", format!("half-width must be positive, got {a}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid("h", format!("mesh size must be positive, got {h}")));
        }
        let ratio = 2.0 * a / h;
        let n_elements = ratio.round();
        if (ratio - n_elements).abs() > 1e-9 * ratio.max(1.0) || n_elements < 2.0 {
            return Err(Error::invalid(
                "h",
                format!("2a/h = {ratio} is not an integer number of elements"),
            ));
        }
        let n_elements = n_elements as usize;
        if n_elements % 2 != 0 {
            return Err(Error::invalid(
                "h",
                format!("2a/h = {n_elements} is odd, so x = 0 would not be a node"),
            ));
        }
        let p = order.degree();
        let n_basis = p * n_elements + 1;
        let centre = (n_basis - 1) / 2;
        let spacing = a / centre as f64;
        let mut nodes: Vec<f64> = (0..n_basis).map(|i| (i as f64 - centre as f64) * spacing).collect();
        nodes[0] = -a;
        nodes[n_basis - 1] = a;
        nodes[centre] = 0.0;

        let quadrature = QuadratureRule::gauss_legendre(quad_points)?;
        let tables = build_tables(order, &quadrature);
        Ok(Self {
            half_width: a,
            element_size: 2.0 * a / n_elements as f64,
            n_elements,
            order,
            nodes,
            quadrature,
            tables,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn element_size(&self) -> f64 {
        self.element_size
    }

    /// Distance between consecutive nodes (`h / p`).
    pub fn node_spacing(&self) -> f64 {
        self.element_size / self.order.degree() as f64
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn order(&self) -> ElementOrder {
        self.order
    }

    pub fn n_basis(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    pub fn tables(&self) -> &ReferenceTables {
        &self.tables
    }

    /// Index of the node at `x = 0`.
    pub fn centre_node(&self) -> usize {
        (self.n_basis() - 1) / 2
    }

    pub fn mirror(&self, i: usize) -> usize {
        self.n_basis() - 1 - i
    }

    /// Global indices of the element's local basis functions.
    pub fn element_dofs(&self, e: usize) -> std::ops::RangeInclusive<usize> {
        let p = self.order.degree();
        p * e..=p * e + p
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let p = self.order.degree();
        (self.nodes[p * e], self.nodes[p * e + p])
    }

    /// Physical coordinate of reference point `xi` in element `e`.
    pub fn map_to_element(&self, e: usize, xi: f64) -> f64 {
        let (lo, hi) = self.element_bounds(e);
        0.5 * (lo + hi) + 0.5 * (hi - lo) * xi
    }

    /// Physical coordinates of all quadrature points, element by element.
    pub fn quadrature_points(&self) -> Vec<f64> {
        (0..self.n_elements)
            .flat_map(|e| self.tables.xi.iter().map(move |&xi| self.map_to_element(e, xi)))
            .collect()
    }

    /// Element containing `x` and the reference coordinate of `x` in it.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let a = self.half_width;
        if !(x >= -a - 1e-12 * a && x <= a + 1e-12 * a) {
            return Err(Error::OutOfDomain { x, a });
        }
        let s = ((x + a) / self.element_size).floor();
        let e = (s.max(0.0) as usize).min(self.n_elements - 1);
        let (lo, hi) = self.element_bounds(e);
        let xi = (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0);
        Ok((e, xi))
    }

    /// Value of the finite-element function with nodal values `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        self.check_len(values)?;
        let (e, xi) = self.locate(x)?;
        let mut shape = [0.0; 3];
        self.order.shape(xi, &mut shape);
        Ok(self
            .element_dofs(e)
            .enumerate()
            .map(|(a, i)| shape[a] * values[i])
            .sum())
    }

    /// Derivative of the finite-element function at `x` (one-sided at nodes).
    pub fn interpolate_derivative(&self, values: &[f64], x: f64) -> Result<f64> {
        self.check_len(values)?;
        let (e, xi) = self.locate(x)?;
        let mut d = [0.0; 3];
        self.order.shape_derivative(xi, &mut d);
        let jac = 2.0 / self.element_size;
        Ok(self
            .element_dofs(e)
            .enumerate()
            .map(|(a, i)| d[a] * jac * values[i])
            .sum())
    }

    /// `∫ φ_i dx` for every basis function.
    pub fn basis_integrals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_basis()];
        let jac = 0.5 * self.element_size;
        for e in 0..self.n_elements {
            for (q, w) in self.tables.weight.iter().enumerate() {
                for (a, i) in self.element_dofs(e).enumerate() {
                    out[i] += w * jac * self.tables.value[q][a];
                }
            }
        }
        out
    }

    /// `∫ f dx` of the finite-element function with nodal values `values`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.basis_integrals().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// `∫ g(x, f(x)) dx` evaluated at the quadrature points, where `f` is the
    /// finite-element function with nodal values `values`.
    pub fn integrate_pointwise<G: Fn(f64, f64) -> f64>(&self, values: &[f64], g: G) -> f64 {
        let jac = 0.5 * self.element_size;
        let mut total = 0.0;
        for e in 0..self.n_elements {
            for (q, (&xi, &w)) in self.tables.xi.iter().zip(&self.tables.weight).enumerate() {
                let x = self.map_to_element(e, xi);
                let fx: f64 = self
                    .element_dofs(e)
                    .enumerate()
                    .map(|(a, i)| self.tables.value[q][a] * values[i])
                    .sum();
                total += w * jac * g(x, fx);
            }
        }
        total
    }

    /// Values of the finite-element function at [`Self::quadrature_points`].
    pub fn at_quadrature(&self, values: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_elements * self.tables.xi.len());
        for e in 0..self.n_elements {
            for q in 0..self.tables.xi.len() {
                out.push(
                    self.element_dofs(e)
                        .enumerate()
                        .map(|(a, i)| self.tables.value[q][a] * values[i])
                        .sum(),
                );
            }
        }
        out
    }

    /// `∫ u v dx` of two finite-element functions.
    pub fn integrate_product(&self, u: &[f64], v: &[f64]) -> f64 {
        let jac = 0.5 * self.element_size;
        let nq = self.tables.xi.len();
        self.at_quadrature(u)
            .iter()
            .zip(self.at_quadrature(v))
            .enumerate()
            .map(|(k, (a, b))| self.tables.weight[k % nq] * jac * a * b)
            .sum()
    }

    /// Nodal interpolant of a pointwise function.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// True when both meshes describe the same discretization.
    pub fn same_as(&self, other: &Mesh1D) -> bool {
        std::ptr::eq(self, other)
            || (self.order == other.order
                && self.n_elements == other.n_elements
                && self.half_width == other.half_width
                && self.quadrature == other.quadrature)
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_basis() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} on a mesh with {} basis functions",
                values.len(),
                self.n_basis()
            )));
        }
        Ok(())
    }
}

fn build_tables(order: ElementOrder, rule: &QuadratureRule) -> ReferenceTables {
    let mut value = Vec::with_capacity(rule.len());
    let mut deriv = Vec::with_capacity(rule.len());
    for &xi in rule.points() {
        let mut v = [0.0; 3];
        let mut d = [0.0; 3];
        order.shape(xi, &mut v);
        order.shape_derivative(xi, &mut d);
        value.push(v);
        deriv.push(d);
    }
    ReferenceTables {
        xi: rule.points().to_vec(),
        weight: rule.weights().to_vec(),
        value,
        deriv,
    }
}
