//! Imaginary-time propagation of the Hermite coefficient system.
//!
//! Each iteration reconstructs the closure `φ_{K+1}`, takes a Crank–Nicolson
//! step, optionally restricts `f_0` to even functions, re-imposes the
//! stationary Wigner equation, orthogonalizes and normalizes.
//!
//! The closure is explicit, so it is weighted by `(1 + s)/2`, `s` being the
//! state's growth over the previous step. This is the Crank–Nicolson average
//! of `φ_{K+1}` at the old and new time levels when the state decays like an
//! eigenstate, and it makes the fixed point independent of `dt`.

mod ks;
mod operator;
mod propagate;
mod state;

use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem1d::{ElementOrder, Mesh1D, DEFAULT_QUAD_POINTS};
use crate::hermite::CoefficientSet;
use crate::potentials::Potential;

pub use ks::WignerKs;
pub use operator::CoupledOperator;
pub use propagate::{apply_h, cn_step, rayleigh_energy, Propagator};
pub use state::{compute_energy, energy_with_closure, normalize, orthogonalize, symmetrize_even};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Truncation order `K`: coefficients `f_0 … f_{2K}` are evolved.
    pub truncation: usize,
    /// Half-width `a` of the domain `[−a, a]`.
    pub half_width: f64,
    pub h: f64,
    pub order: ElementOrder,
    pub quad_points: usize,
    pub dt: f64,
    /// Final imaginary time `T`.
    pub t_max: f64,
    /// Stop once `max_k ‖φ_k^now − φ_k^last‖∞ ≤ tol`.
    pub tol: f64,
    pub n_states: usize,
    pub enforce_even: bool,
    /// Re-impose the stationary Wigner equation after every step.
    pub project: bool,
    /// Hold `f_0(0) = 0`.
    pub pin_origin: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            truncation: 10,
            half_width: 10.0,
            h: 0.1,
            order: ElementOrder::Linear,
            quad_points: DEFAULT_QUAD_POINTS,
            dt: 0.01,
            t_max: 500.0,
            tol: 1e-10,
            n_states: 1,
            enforce_even: true,
            project: true,
            pin_origin: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid(
                "t_max",
                format!("must be non-negative, got {}", self.t_max),
            ));
        }
        if self.n_states == 0 {
            return Err(Error::invalid("n_states", "must be at least 1"));
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Arc<Mesh1D>> {
        Mesh1D::with_quadrature(self.half_width, self.h, self.order, self.quad_points).map(Arc::new)
    }
}

/// One ITP iteration as seen by a trace consumer.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub tau: f64,
    pub err: f64,
    pub energies: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct StateEnsemble {
    /// Lowest state first.
    pub states: Vec<CoefficientSet>,
    /// Momentum-moment energies.
    pub energies: Vec<f64>,
    /// Rayleigh-quotient energies of the discrete operator, for cross-checks.
    pub rayleigh: Vec<f64>,
    pub iterations: usize,
    pub tau: f64,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    pub final_err: f64,
}

/// Seeded uniform random `f_0` per state, made even if requested, projected
/// (when projection is on) and normalized. Without projection the higher
/// coefficients start at zero.
pub fn initial_states(op: &CoupledOperator, config: &SolverConfig) -> Result<Vec<CoefficientSet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mesh = op.mesh().clone();
    let n = mesh.n_basis();
    (0..config.n_states)
        .map(|_| {
            let mut f = CoefficientSet::zeros(mesh.clone(), op.truncation());
            f.coeffs_mut()[0] = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            prepare(op, config, &mut f)?;
            if config.project {
                f = op.project_constraint(&f)?;
            }
            normalize(&f)
        })
        .collect()
}

fn prepare(op: &CoupledOperator, config: &SolverConfig, f: &mut CoefficientSet) -> Result<()> {
    if config.enforce_even {
        state::symmetrize_in_place(f);
    }
    if config.pin_origin {
        let c = op.mesh().centre_node();
        f.coeffs_mut()[0][c] = 0.0;
    }
    Ok(())
}

/// Algorithm driver: builds the mesh and operator, then propagates from a
/// random start.
pub fn run_itp(config: &SolverConfig, potential: &dyn Potential) -> Result<StateEnsemble> {
    config.validate()?;
    let op = CoupledOperator::new(config.mesh()?, potential, config.truncation)?;
    run_itp_with(&op, config, None)
}

/// Propagates on a prebuilt operator, optionally from given states.
pub fn run_itp_with(
    op: &CoupledOperator,
    config: &SolverConfig,
    start: Option<Vec<CoefficientSet>>,
) -> Result<StateEnsemble> {
    config.validate()?;
    if config.truncation != op.truncation() {
        return Err(Error::DimensionMismatch(format!(
            "config has K = {}, operator has K = {}",
            config.truncation,
            op.truncation()
        )));
    }
    let mut states = match start {
        Some(s) if s.len() == config.n_states => s,
        Some(s) => {
            return Err(Error::DimensionMismatch(format!(
                "{} start states for {} requested",
                s.len(),
                config.n_states
            )))
        }
        None => initial_states(op, config)?,
    };
    let prop = Propagator::new(op, config.dt)?;
    let max_steps = (config.t_max / config.dt).round() as usize;
    let mut trace = Vec::new();
    let mut err = f64::INFINITY;
    let mut iterations = 0;
    let mut growth = vec![1.0; states.len()];
    while iterations < max_steps && !(err <= config.tol) {
        let step = iterations + 1;
        let mut next = Vec::with_capacity(states.len());
        for (s, g) in states.iter().zip(&mut growth) {
            let mut closure = op.closure(s)?;
            let weight = 0.5 * (1.0 + *g);
            closure.iter_mut().for_each(|v| *v *= weight);
            let mut f = prop.step(op, s, &closure)?;
            if f.coeffs().iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NotFinite { step });
            }
            let ratio = f.trace() / s.trace();
            *g = if ratio.is_finite() && ratio > 0.0 { ratio } else { 1.0 };
            prepare(op, config, &mut f)?;
            if config.project {
                f = op.project_constraint(&f)?;
            }
            next.push(f);
        }
        if next.len() > 1 {
            next = orthogonalize(&next, op.mass())?;
        }
        for f in &mut next {
            state::normalize_in_loop(f, step)?;
            if f.coeffs().iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NotFinite { step });
            }
        }
        err = next
            .iter()
            .zip(&states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        states = next;
        iterations = step;
        let energies = states
            .iter()
            .map(|f| energy_with_closure(op, f))
            .collect::<Result<Vec<_>>>()?;
        trace.push(TraceRecord {
            iteration: step,
            tau: step as f64 * config.dt,
            err,
            energies,
        });
    }
    let energies = states
        .iter()
        .map(|f| energy_with_closure(op, f))
        .collect::<Result<Vec<_>>>()?;
    let rayleigh = states
        .iter()
        .map(|f| Ok(rayleigh_energy(op, f, &op.closure(f)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateEnsemble {
        states,
        energies,
        rayleigh,
        iterations,
        tau: iterations as f64 * config.dt,
        trace,
        converged: err <= config.tol,
        final_err: err,
    })
}
