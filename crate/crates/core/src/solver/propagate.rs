use crate::error::{Error, Result};
use crate::fem1d::{BandedLu, BandedMatrix};
use crate::hermite::CoefficientSet;

use super::operator::{even_weight, CoupledOperator};

/// `(2k+2)(2k+1)`, the weight of `φ_{k+1}` in block `k`.
fn upper_weight(k: usize) -> f64 {
    ((2 * k + 2) * (2 * k + 1)) as f64
}

/// Block `(k, k−l)` of the discrete `H_w` acting on `φ_{k−l}`, `l ≤ k`:
/// diagonal `S/4 + (4k+1)M + 2W_0`, first subdiagonal `M − W_2/4`, and
/// `2/((2l)!(−4)^l) W_{2l}` further down.
fn lower_block(op: &CoupledOperator, k: usize, l: usize, i: usize, j: usize) -> f64 {
    let mut v = even_weight(l) * op.weighted_mass(2 * l).get(i, j);
    match l {
        0 => v += 0.25 * op.stiffness().get(i, j) + (4 * k + 1) as f64 * op.mass().get(i, j),
        1 => v += op.mass().get(i, j),
        _ => {}
    }
    v
}

/// `ℍ f` block by block, with the closure `φ_{K+1}` supplied explicitly.
pub fn apply_h(op: &CoupledOperator, f: &CoefficientSet, closure: &[f64]) -> Vec<Vec<f64>> {
    let kk = op.truncation();
    let n = op.mesh().n_basis();
    let mut out = vec![vec![0.0; n]; kk + 1];
    let mut tmp = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate() {
        let upper = if k < kk { f.coeff(k + 1) } else { closure };
        op.mass().matvec_into(upper, &mut tmp);
        o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += upper_weight(k) * b);
        op.stiffness().matvec_into(f.coeff(k), &mut tmp);
        o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += 0.25 * b);
        op.mass().matvec_into(f.coeff(k), &mut tmp);
        o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += (4 * k + 1) as f64 * b);
        if k > 0 {
            op.mass().matvec_into(f.coeff(k - 1), &mut tmp);
            o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += b);
        }
        for l in 0..=k {
            op.weighted_mass(2 * l).matvec_into(f.coeff(k - l), &mut tmp);
            let c = even_weight(l);
            o.iter_mut().zip(&tmp).for_each(|(a, b)| *a += c * b);
        }
    }
    out
}

/// Rayleigh quotient `⟨f, ℍf⟩ / (2⟨f, 𝕄f⟩)` over all coefficient blocks, an
/// energy estimate independent of the momentum-moment formula.
pub fn rayleigh_energy(op: &CoupledOperator, f: &CoefficientSet, closure: &[f64]) -> f64 {
    let hf = apply_h(op, f, closure);
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, h) in hf.iter().enumerate() {
        let c = f.coeff(k);
        num += c.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
        den += c.iter().zip(op.mass().matvec(c)).map(|(a, b)| a * b).sum::<f64>();
    }
    num / (2.0 * den)
}

/// Crank–Nicolson step for the coupled system, factored once per `dt`.
///
/// Unknowns are interleaved node by node, index `node·(K+1) + k`, which keeps
/// the block matrix banded.
#[derive(Debug, Clone)]
pub struct Propagator {
    dt: f64,
    truncation: usize,
    explicit: BandedMatrix,
    implicit: Option<BandedLu>,
}

impl Propagator {
    pub fn new(op: &CoupledOperator, dt: f64) -> Result<Self> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("must be non-negative, got {dt}")));
        }
        let kk = op.truncation();
        let b = kk + 1;
        let p = op.mesh().order().degree();
        let n = op.mesh().n_basis();
        let lower = p * b + kk;
        let upper = p * b + 1;
        let mut plus = BandedMatrix::zeros(n * b, lower, upper);
        let mut minus = BandedMatrix::zeros(n * b, lower, upper);
        let half = 0.5 * dt;
        for i in 0..n {
            for j in op.mass().row_columns(i) {
                let m = op.mass().get(i, j);
                for k in 0..=kk {
                    let row = i * b + k;
                    for l in 0..=k {
                        let h = lower_block(op, k, l, i, j);
                        let mij = if l == 0 { m } else { 0.0 };
                        plus.add(row, j * b + k - l, mij + half * h);
                        minus.add(row, j * b + k - l, mij - half * h);
                    }
                    if k < kk {
                        let h = upper_weight(k) * m;
                        plus.add(row, j * b + k + 1, half * h);
                        minus.add(row, j * b + k + 1, -half * h);
                    }
                }
            }
        }
        let implicit = if dt == 0.0 { None } else { Some(plus.factor()?) };
        Ok(Self {
            dt,
            truncation: kk,
            explicit: minus,
            implicit,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `(𝕄 + dt/2 ℍ) x' = (𝕄 − dt/2 ℍ) x − dt (2K+2)(2K+1) M φ_{K+1}` in the
    /// last block, with `φ_{K+1}` given explicitly.
    pub fn step(&self, op: &CoupledOperator, f: &CoefficientSet, closure: &[f64]) -> Result<CoefficientSet> {
        if f.truncation() != self.truncation || closure.len() != f.coeff(0).len() {
            return Err(Error::DimensionMismatch("state does not match the propagator".into()));
        }
        let Some(lu) = &self.implicit else {
            return Ok(f.clone());
        };
        let b = self.truncation + 1;
        let n = closure.len();
        let mut x = vec![0.0; n * b];
        for (k, c) in f.coeffs().iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                x[i * b + k] = *v;
            }
        }
        let mut rhs = self.explicit.matvec(&x);
        let w = self.dt * upper_weight(self.truncation);
        for (i, v) in op.mass().matvec(closure).into_iter().enumerate() {
            rhs[i * b + self.truncation] -= w * v;
        }
        lu.solve_in_place(&mut rhs);
        let coeffs = (0..b).map(|k| (0..n).map(|i| rhs[i * b + k]).collect()).collect();
        CoefficientSet::new(f.mesh().clone(), coeffs)
    }
}

/// One Crank–Nicolson step; builds and factors the block system each call.
pub fn cn_step(op: &CoupledOperator, f: &CoefficientSet, closure: &[f64], dt: f64) -> Result<CoefficientSet> {
    Propagator::new(op, dt)?.step(op, f, closure)
}
