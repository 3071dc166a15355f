//! Kohn–Sham DFT for two electrons in one spatial orbital with a contact
//! interaction: local Hartree, LDA exchange and a rational LDA correlation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem1d::Mesh1D;

/// Negative densities down to `−DENSITY_ROUNDOFF · max ρ` are treated as
/// round-off and clamped to zero.
pub const DENSITY_ROUNDOFF: f64 = 1e-9;

/// Parameters of `ε_C(ρ) = (aρ³ + bρ²) / (ρ² + dρ + e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConstants {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub e: f64,
}

impl Default for LdaConstants {
    fn default() -> Self {
        Self {
            a: -1.0 / 24.0,
            b: -0.00436143,
            d: 0.252758,
            e: 0.0174457,
        }
    }
}

impl LdaConstants {
    /// Correlation energy density (integrand of `E_C`).
    pub fn energy_density(&self, rho: f64) -> f64 {
        let Self { a, b, d, e } = *self;
        (a * rho.powi(3) + b * rho * rho) / (rho * rho + d * rho + e)
    }

    /// `dε_C/dρ`.
    pub fn potential(&self, rho: f64) -> f64 {
        let Self { a, b, d, e } = *self;
        let num = a * rho.powi(3) + b * rho * rho;
        let den = rho * rho + d * rho + e;
        ((3.0 * a * rho * rho + 2.0 * b * rho) * den - num * (2.0 * rho + d)) / (den * den)
    }
}

fn clamp_density(rho: &[f64]) -> Result<Vec<f64>> {
    let floor = -DENSITY_ROUNDOFF * rho.iter().fold(0.0, |m: f64, v| m.max(*v));
    rho.iter()
        .enumerate()
        .map(|(node, &value)| {
            if value < floor || !value.is_finite() {
                Err(Error::NegativeDensity { node, value })
            } else {
                Ok(value.max(0.0))
            }
        })
        .collect()
}

/// Nodal exchange and correlation potentials `(V_X, V_C)` with `V_X = −ρ/2`.
pub fn lda_vxc(rho: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rho = clamp_density(rho)?;
    let lda = LdaConstants::default();
    let vx = rho.iter().map(|r| -0.5 * r).collect();
    let vc = rho.iter().map(|&r| lda.potential(r)).collect();
    Ok((vx, vc))
}

/// Contact Hartree potential `V_H = ρ`.
pub fn hartree(rho: &[f64]) -> Vec<f64> {
    rho.to_vec()
}

/// `U_H = ½ ∫ ρ²`.
pub fn hartree_energy(mesh: &Mesh1D, rho: &[f64]) -> f64 {
    0.5 * mesh.integrate_pointwise(rho, |_, r| r * r)
}

/// `E_X = −¼ ∫ ρ²`.
pub fn exchange_energy(mesh: &Mesh1D, rho: &[f64]) -> f64 {
    -0.25 * mesh.integrate_pointwise(rho, |_, r| r * r)
}

pub fn correlation_energy(mesh: &Mesh1D, rho: &[f64]) -> f64 {
    let lda = LdaConstants::default();
    mesh.integrate_pointwise(rho, |_, r| lda.energy_density(r.max(0.0)))
}

/// `E = 2ε − U_H − ∫ V_XC ρ + E_X + E_C`.
pub fn total_energy(mesh: &Mesh1D, epsilon: f64, rho: &[f64]) -> Result<f64> {
    let (vx, vc) = lda_vxc(rho)?;
    let vxc: Vec<f64> = vx.iter().zip(&vc).map(|(a, b)| a + b).collect();
    let vxc_rho = mesh.integrate_product(&vxc, rho);
    Ok(
        2.0 * epsilon - hartree_energy(mesh, rho) - vxc_rho
            + exchange_energy(mesh, rho)
            + correlation_energy(mesh, rho),
    )
}

/// Lowest Kohn–Sham orbital for a given nodal Hartree–XC potential.
#[derive(Debug, Clone)]
pub struct KsSolution {
    pub epsilon: f64,
    /// Nodal density with `∫ρ = 2`.
    pub density: Vec<f64>,
}

/// Inner ground-state solver used by [`scf_solve`]. Implementations own the
/// external potential and may keep state between calls for warm starts.
pub trait KsEigensolver {
    fn mesh(&self) -> &Arc<Mesh1D>;
    fn solve(&mut self, v_hxc: &[f64]) -> Result<KsSolution>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfConfig {
    /// Linear mixing weight of the new density.
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// When false, Hartree and XC are switched off.
    pub interacting: bool,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            alpha: 0.3,
            tol: 1e-9,
            max_iter: 200,
            interacting: true,
        }
    }
}

impl ScfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must lie in (0, 1], got {}", self.alpha),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("scf_tol", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("scf_max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfRecord {
    pub iteration: usize,
    /// `‖ρ_out − ρ_in‖∞`.
    pub delta: f64,
    pub epsilon: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct DftState {
    pub density: Vec<f64>,
    pub epsilon: f64,
    pub v_h: Vec<f64>,
    pub v_x: Vec<f64>,
    pub v_c: Vec<f64>,
    pub energy: f64,
    pub history: Vec<ScfRecord>,
    pub converged: bool,
}

impl DftState {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

/// `V_H + V_X + V_C` of a density (all zero when non-interacting).
pub fn hxc_potential(rho: &[f64], interacting: bool) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if !interacting {
        let z = vec![0.0; rho.len()];
        return Ok((z.clone(), z.clone(), z));
    }
    let rho = clamp_density(rho)?;
    let (vx, vc) = lda_vxc(&rho)?;
    Ok((hartree(&rho), vx, vc))
}

/// Self-consistent field iteration with linear density mixing, starting from
/// the non-interacting ground state.
pub fn scf_solve(inner: &mut dyn KsEigensolver, config: &ScfConfig) -> Result<DftState> {
    config.validate()?;
    let mesh = inner.mesh().clone();
    let n = mesh.n_basis();
    let bare = inner.solve(&vec![0.0; n])?;
    let mut rho_in = bare.density;
    let mut history = Vec::new();
    let mut converged = false;
    let mut last = None;
    for iteration in 1..=config.max_iter {
        let (vh, vx, vc) = hxc_potential(&rho_in, config.interacting)?;
        let v_hxc: Vec<f64> = (0..n).map(|i| vh[i] + vx[i] + vc[i]).collect();
        let sol = inner.solve(&v_hxc)?;
        let delta = sol
            .density
            .iter()
            .zip(&rho_in)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let energy = if config.interacting {
            total_energy(&mesh, sol.epsilon, &rho_in)?
        } else {
            2.0 * sol.epsilon
        };
        history.push(ScfRecord {
            iteration,
            delta,
            epsilon: sol.epsilon,
            energy,
        });
        if delta <= config.tol {
            converged = true;
            last = Some((sol, vh, vx, vc, energy));
            break;
        }
        for (r, s) in rho_in.iter_mut().zip(&sol.density) {
            *r = (1.0 - config.alpha) * *r + config.alpha * s;
        }
        last = Some((sol, vh, vx, vc, energy));
    }
    let (sol, v_h, v_x, v_c, energy) = last.expect("max_iter >= 1");
    Ok(DftState {
        density: sol.density,
        epsilon: sol.epsilon,
        v_h,
        v_x,
        v_c,
        energy,
        history,
        converged,
    })
}
