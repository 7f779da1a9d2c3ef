use crate::linalg::svd::right_singular_gram;
use crate::linalg::{axpy, orthonormal_range, real_schur_ordered, DenseMatrix, SchurOrdering, SymOperator};
use crate::{Error, Result};
use std::borrow::Cow;

/// Approximate Krylov decomposition `K U_{p−1} = U H̲ + R` with `U` (n×p)
/// orthonormal, `H̲` of size p×(p−1) and `UᵀR = 0`.
///
/// `U` may be held as `Ũ V` with `V` orthogonal; it is then only formed on
/// request.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    pub(crate) base: DenseMatrix,
    pub(crate) rotation: Option<DenseMatrix>,
    pub(crate) hbar: DenseMatrix,
    pub(crate) rres: DenseMatrix,
}

impl KrylovDecomposition {
    pub fn dim(&self) -> usize {
        self.base.cols()
    }

    pub fn u(&self) -> Cow<'_, DenseMatrix> {
        match &self.rotation {
            Some(v) => Cow::Owned(self.base.matmul(v)),
            None => Cow::Borrowed(&self.base),
        }
    }

    pub fn hbar(&self) -> &DenseMatrix {
        &self.hbar
    }

    pub fn rres(&self) -> &DenseMatrix {
        &self.rres
    }

    pub fn residual_norm(&self) -> f64 {
        self.rres.frobenius_norm()
    }

    /// `‖K U_{p−1} − U H̲ − R‖_F`; costs `p − 1` operator applications.
    pub fn relation_error(&self, op: &impl SymOperator) -> f64 {
        let u = self.u();
        let p = self.dim();
        if p == 0 {
            return 0.0;
        }
        let uh = u.matmul(&self.hbar);
        let mut e = 0.0;
        for j in 0..p - 1 {
            let ku = op.apply_vec(u.col(j));
            for i in 0..ku.len() {
                e += (ku[i] - uh[(i, j)] - self.rres[(i, j)]).powi(2);
            }
        }
        e.sqrt()
    }
}

/// Diagnostics of the initialization.
#[derive(Debug, Clone)]
pub struct InitInfo {
    /// Columns of the input dropped as numerically dependent.
    pub dropped: usize,
    pub matvecs: usize,
    /// Singular values of `R̃`, descending.
    pub omega: Vec<f64>,
    /// Eigenvalues of `H̃ = ŨᵀKŨ` in the requested order.
    pub ritz: Vec<(f64, f64)>,
    /// `‖R̃ s_j‖` for the ordered Schur vectors `s_j` of `H̃`.
    pub residual_norms: Vec<f64>,
}

/// Minimum-backward-error Krylov decomposition for `range(W̃)`.
pub fn min_backward_error_decomposition(op: &impl SymOperator, w: &DenseMatrix) -> Result<KrylovDecomposition> {
    Ok(initialize(op, w, SchurOrdering::default(), false)?.0)
}

/// Thin QR `W̃ = Ũ S`, `H̃ = ŨᵀKŨ`, `R̃ = KŨ − ŨH̃ = Φ Ω Ψᵀ`; with
/// `V = [ψ₂ … ψ_k ψ₁]` returns `U = ŨV`, `H̲ = VᵀH̃V_{k−1}`, `R = R̃V_{k−1}`.
/// The largest singular direction of `R̃` becomes the Krylov direction `u_k`,
/// so `‖R‖_F² = Σ_{i≥2} ω_i²`. With `lazy` the product `ŨV` is not formed.
pub(crate) fn initialize(
    op: &impl SymOperator,
    w: &DenseMatrix,
    ordering: SchurOrdering,
    lazy: bool,
) -> Result<(KrylovDecomposition, InitInfo)> {
    if w.rows() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: w.rows(),
        });
    }
    let (ut, kept) = orthonormal_range(w);
    let k = ut.cols();
    let n = w.rows();
    if k == 0 {
        return Err(Error::RankDeficient { column: 0, value: 0.0 });
    }
    let mut ku = DenseMatrix::zeros(n, 0);
    for col in ut.columns() {
        ku.push_col(&op.apply_vec(col));
    }
    let h = ut.tr_matmul(&ku);
    let mut r = ku;
    for j in 0..k {
        let rc = r.col_mut(j);
        for i in 0..k {
            axpy(-h[(i, j)], ut.col(i), rc);
        }
    }
    let (omega, psi) = right_singular_gram(&r)?;

    let schur = real_schur_ordered(&h, ordering)?;
    // ‖R̃ s‖² = Σ ω_i² (ψ_iᵀ s)².
    let residual_norms = (0..k)
        .map(|j| {
            let s = schur.x.col(j);
            (0..k)
                .map(|i| {
                    let c: f64 = psi.col(i).iter().zip(s).map(|(a, b)| a * b).sum();
                    (omega[i] * c).powi(2)
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let mut order: Vec<usize> = (1..k).collect();
    order.push(0);
    let v = psi.select_cols(&order);
    let v1 = v.col_range(0, k - 1);
    let hbar = v.tr_matmul(&h.matmul(&v1));
    let rres = r.matmul(&v1);
    let (base, rotation) = if lazy { (ut, Some(v)) } else { (ut.matmul(&v), None) };
    Ok((
        KrylovDecomposition {
            base,
            rotation,
            hbar,
            rres,
        },
        InitInfo {
            dropped: w.cols() - kept.len(),
            matvecs: k,
            omega,
            ritz: schur.eigenvalues,
            residual_norms,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::{random_block, random_orthogonal, random_symmetric};
    use crate::linalg::thin_svd;

    #[test]
    fn exact_invariant_subspace_has_zero_residual() {
        let q = random_orthogonal(40, 1);
        let spec: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let a = q.matmul(&DenseMatrix::diag(&spec)).matmul(&q.transpose());
        let d = min_backward_error_decomposition(&a, &q.col_range(0, 5)).unwrap();
        assert!(d.residual_norm() <= 1e-12 * 40.0);
    }

    #[test]
    fn single_vector() {
        let a = random_symmetric(10, 2);
        let w = DenseMatrix::from_fn(10, 1, |i, _| (i + 1) as f64);
        let d = min_backward_error_decomposition(&a, &w).unwrap();
        assert_eq!(d.hbar().cols(), 0);
        assert_eq!(d.rres().cols(), 0);
        let u = d.u();
        let nw = crate::linalg::norm(w.col(0));
        for i in 0..10 {
            assert!((u[(i, 0)].abs() - w[(i, 0)] / nw).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_identity_against_svd_oracle() {
        for seed in 0..50 {
            let a = random_symmetric(100, 100 + seed);
            let w = random_block(100, 6, 200 + seed);
            let d = min_backward_error_decomposition(&a, &w).unwrap();
            // Oracle: R̃ formed independently, ω₁ from the one-sided Jacobi SVD.
            let (ut, _) = orthonormal_range(&w);
            let ku = a.matmul(&ut);
            let rt = ku.sub(&ut.matmul(&ut.tr_matmul(&ku)));
            let omega1 = thin_svd(&rt).unwrap().omega[0];
            let lhs = d.residual_norm().powi(2);
            let rhs = rt.frobenius_norm().powi(2) - omega1 * omega1;
            assert!((lhs - rhs).abs() <= 1e-10 * rt.frobenius_norm().powi(2), "seed {seed}");
            let u = d.u();
            assert!(u.orthogonality_error() < 1e-12);
            assert!(u.tr_matmul(d.rres()).max_abs() < 1e-10 * a.frobenius_norm());
            assert!(d.relation_error(&a) < 1e-10 * a.frobenius_norm());
        }
    }

    #[test]
    fn dependent_columns_are_dropped() {
        let a = random_symmetric(20, 3);
        let mut w = random_block(20, 3, 4);
        let c: Vec<f64> = w.col(0).iter().zip(w.col(1)).map(|(x, y)| x + y).collect();
        w.push_col(&c);
        let (d, info) = initialize(&a, &w, SchurOrdering::default(), false).unwrap();
        assert_eq!(info.dropped, 1);
        assert_eq!(d.dim(), 3);
    }
}
