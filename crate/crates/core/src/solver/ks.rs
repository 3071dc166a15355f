use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem1d::Mesh1D;
use crate::hermite::CoefficientSet;
use crate::potentials::dft::{KsEigensolver, KsSolution};
use crate::potentials::{NodalPotential, Potential, SumPotential};

use super::{energy_with_closure, run_itp_with, CoupledOperator, SolverConfig};

/// Kohn–Sham ground state from the Wigner solver: `ρ = 2 f_0`, with the
/// orbital energy from the momentum moments. Successive calls start from the
/// previous state.
#[derive(Debug)]
pub struct WignerKs {
    mesh: Arc<Mesh1D>,
    external: Arc<dyn Potential>,
    config: SolverConfig,
    warm: Option<Vec<CoefficientSet>>,
    last: Option<CoefficientSet>,
}

impl WignerKs {
    pub fn new(config: SolverConfig, external: Arc<dyn Potential>) -> Result<Self> {
        config.validate()?;
        if config.n_states != 1 {
            return Err(Error::invalid(
                "n_states",
                "the Kohn–Sham solver needs exactly one state",
            ));
        }
        Ok(Self {
            mesh: config.mesh()?,
            external,
            config,
            warm: None,
            last: None,
        })
    }

    /// Coefficient functions of the most recent solve.
    pub fn state(&self) -> Option<&CoefficientSet> {
        self.last.as_ref()
    }
}

impl KsEigensolver for WignerKs {
    fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    fn solve(&mut self, v_hxc: &[f64]) -> Result<KsSolution> {
        let nodal = NodalPotential::new(self.mesh.clone(), v_hxc.to_vec(), 2 * self.config.truncation + 1)?;
        let total = SumPotential::new(vec![self.external.clone(), Arc::new(nodal)]);
        let op = CoupledOperator::new(self.mesh.clone(), &total, self.config.truncation)?;
        let run = run_itp_with(&op, &self.config, self.warm.take())?;
        if !run.converged {
            return Err(Error::NotConverged {
                stage: "Wigner imaginary-time propagation",
                residual: run.final_err,
            });
        }
        let f = run.states.into_iter().next().expect("one state");
        let epsilon = energy_with_closure(&op, &f)?;
        let density = f.coeff(0).iter().map(|v| 2.0 * v).collect();
        self.warm = Some(vec![f.clone()]);
        self.last = Some(f);
        Ok(KsSolution { epsilon, density })
    }
}
