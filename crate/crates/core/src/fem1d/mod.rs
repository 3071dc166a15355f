//! One-dimensional finite elements on uniform meshes of `[-a, a]`.
//!
//! Lagrange elements of order 1 and 2, Gauss–Legendre quadrature, the mass,
//! stiffness, advection and potential-weighted mass matrices, and a banded
//! LU solver. No boundary conditions are built into the assembled matrices;
//! callers impose Dirichlet rows at solve time.

mod assembly;
mod banded;
mod mesh;
mod quadrature;

pub use assembly::{
    assemble_advection, assemble_mass, assemble_stiffness, assemble_weighted_mass, assemble_weighted_mass_sampled,
};
pub use banded::{solve_banded, BandedLu, BandedMatrix};
pub use mesh::{ElementOrder, Mesh1D, ReferenceTables, DEFAULT_QUAD_POINTS};
pub use quadrature::QuadratureRule;
