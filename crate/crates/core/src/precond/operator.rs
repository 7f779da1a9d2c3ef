//! Split-preconditioned operator `L⁻¹ P K Pᵀ L⁻ᵀ`.

use super::ic::ICFactor;
use crate::linalg::{SparseSymMatrix, SymOperator};
use crate::{Error, Result};

/// `K` together with an optional incomplete factor of `P K Pᵀ`. Without a
/// factor the operator is `K` itself and preconditioned and nodal
/// coordinates coincide.
#[derive(Debug, Clone)]
pub struct PrecondOperator {
    k: SparseSymMatrix,
    k_perm: Option<SparseSymMatrix>,
    factor: Option<ICFactor>,
}

impl PrecondOperator {
    pub fn new(k: SparseSymMatrix, factor: Option<ICFactor>) -> Result<Self> {
        let k_perm = match &factor {
            Some(f) => {
                if f.n() != k.n() {
                    return Err(Error::DimensionMismatch {
                        expected: k.n(),
                        got: f.n(),
                    });
                }
                Some(k.permute(&f.perm)?)
            }
            None => None,
        };
        Ok(Self { k, k_perm, factor })
    }

    pub fn unpreconditioned(k: SparseSymMatrix) -> Self {
        Self {
            k,
            k_perm: None,
            factor: None,
        }
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.k
    }

    pub fn factor(&self) -> Option<&ICFactor> {
        self.factor.as_ref()
    }

    /// `w = Lᵀ P x`.
    pub fn to_precond(&self, x: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(f) => {
                let mut w = f.permute(x);
                f.mul_upper(&mut w);
                w
            }
            None => x.to_vec(),
        }
    }

    /// `x = Pᵀ L⁻ᵀ w`.
    pub fn to_nodal(&self, w: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(f) => {
                let mut t = w.to_vec();
                f.solve_upper(&mut t);
                f.unpermute(&t)
            }
            None => w.to_vec(),
        }
    }

    /// Right-hand side in preconditioned coordinates, `L⁻¹ P f`.
    pub fn rhs(&self, f: &[f64]) -> Vec<f64> {
        match &self.factor {
            Some(fac) => {
                let mut t = fac.permute(f);
                fac.solve_lower(&mut t);
                t
            }
            None => f.to_vec(),
        }
    }
}

impl SymOperator for PrecondOperator {
    fn dim(&self) -> usize {
        self.k.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match (&self.factor, &self.k_perm) {
            (Some(f), Some(kp)) => {
                let mut t = x.to_vec();
                f.solve_upper(&mut t);
                kp.spmv_into(&t, y);
                f.solve_lower(y);
            }
            _ => self.k.spmv_into(x, y),
        }
    }
}
