use std::f64::consts::PI;

use super::Potential;
use crate::error::{Error, Result};
use crate::jet::Jet;

fn norm_sq() -> f64 {
    1.0 / (16.0 * PI.sqrt() + 10.0 * PI)
}

/// Ground-state density of the two-electron Hooke's atom (spring constant
/// 1/4, Coulomb interaction) as a Taylor jet of length `len` about `x0`.
pub fn hooke_exact_density_jet(x0: f64, len: usize) -> Jet {
    let x = Jet::variable(x0, len);
    let x2 = &x * &x;
    let x3 = &x2 * &x;
    let x4 = &x2 * &x2;
    let s2p = (2.0 * PI).sqrt();
    let gauss = x2.scale(-0.5).exp();
    let first = &x2.scale(2.0).add_scalar(4.0) * &gauss;
    let poly = &(&x2.scale(2.5) + &x4.scale(0.25)).add_scalar(1.75);
    let odd = &x.scale(3.0) + &x3;
    let erf = x.scale(std::f64::consts::FRAC_1_SQRT_2).erf();
    let bracket = &(&first + &poly.scale(s2p)) + &(&erf * &odd).scale(s2p);
    (&gauss * &bracket).scale(2.0 * norm_sq())
}

/// `ρ(x) = 2C² e^{−x²/2} [(4 + 2x²) e^{−x²/2} + √(2π)(7/4 + 5x²/2 + x⁴/4)
/// + √(2π) erf(x/√2)(3x + x³)]`, `C = (16√π + 10π)^{−1/2}`; `∫ρ = 2`.
pub fn hooke_exact_density(x: f64) -> f64 {
    let x2 = x * x;
    let s2p = (2.0 * PI).sqrt();
    let g = (-0.5 * x2).exp();
    let bracket = (4.0 + 2.0 * x2) * g
        + s2p * (1.75 + 2.5 * x2 + 0.25 * x2 * x2)
        + s2p * libm::erf(x * std::f64::consts::FRAC_1_SQRT_2) * (3.0 * x + x * x2);
    2.0 * norm_sq() * g * bracket
}

/// Exact Kohn–Sham potential of Hooke's atom with the orbital energy offset
/// set to zero: `V = (ρ''ρ − ρ'²/2) / (4ρ²)`. Derivatives are exact, by
/// Taylor-mode differentiation of the closed-form density.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HookeKs;

impl HookeKs {
    fn jet(x: f64, len: usize) -> Jet {
        let rho = hooke_exact_density_jet(x, len + 2);
        let d1 = rho.differentiate();
        let d2 = d1.differentiate();
        let rho = rho.truncate(len);
        let d1 = d1.truncate(len);
        let num = &(&d2 * &rho) - &(&d1 * &d1).scale(0.5);
        &num / &(&rho * &rho).scale(4.0)
    }
}

impl Potential for HookeKs {
    fn derivative(&self, x: f64, m: usize) -> Result<f64> {
        Ok(Self::jet(x, m + 1).derivative(m))
    }

    fn derivatives(&self, x: f64, max_order: usize) -> Result<Vec<f64>> {
        let d = Self::jet(x, max_order + 1).derivatives();
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularPotential { name: "hooke_ks", x });
        }
        Ok(d)
    }

    fn name(&self) -> &str {
        "hooke_ks"
    }
}
