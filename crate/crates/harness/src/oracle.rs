//! Reference eigenspaces for angle tables: inverse subspace iteration with
//! Rayleigh-Ritz, inner solves by conjugate gradients. Independent of the
//! Krylov-Schur code it is used to assess.

use anyhow::{bail, Result};
use krecycle::linalg::{axpy, dot, norm, sym_eig, thin_qr, DenseMatrix, SymOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest operator dimension accepted by the oracle.
pub const MAX_ORACLE_DIM: usize = 20_000;

/// Conjugate gradients for SPD `A x = b` from `x = 0`.
pub fn cg(op: &impl SymOperator, b: &[f64], tol: f64, maxit: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = tol * rr.sqrt();
    let mut ap = vec![0.0; n];
    for _ in 0..maxit {
        if rr.sqrt() <= stop {
            return Ok(x);
        }
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            bail!("operator is not positive definite (pᵀAp = {pap:e})");
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    if rr.sqrt() <= stop {
        Ok(x)
    } else {
        bail!("CG did not reach {tol:e} in {maxit} iterations")
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the `dim`
/// smallest eigenpairs of an SPD operator, with residuals
/// `‖A x − θ x‖ ≤ tol · θ_max` among the returned pairs.
pub fn smallest_eigenspace(op: &impl SymOperator, dim: usize, tol: f64, seed: u64) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = op.dim();
    if n > MAX_ORACLE_DIM {
        bail!("oracle limited to {MAX_ORACLE_DIM} unknowns, operator has {n}");
    }
    let block = (dim + 10).min(n);
    if dim == 0 || dim > n {
        bail!("requested {dim} eigenpairs of a {n}-dimensional operator");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = DenseMatrix::from_fn(n, block, |_, _| rng.gen::<f64>() - 0.5);
    let mut x = thin_qr(&x0)?.q;
    for _ in 0..500 {
        // Y = A⁻¹ X, then Rayleigh-Ritz on range(Y).
        let mut y = DenseMatrix::zeros(n, 0);
        for c in x.columns() {
            y.push_col(&cg(op, c, 1e-13, 20 * n)?);
        }
        let q = thin_qr(&y)?.q;
        let mut aq = DenseMatrix::zeros(n, 0);
        for c in q.columns() {
            aq.push_col(&op.apply_vec(c));
        }
        let mut h = q.tr_matmul(&aq);
        h.symmetrize();
        let e = sym_eig(&h)?;
        x = q.matmul(&e.vectors);
        let ax = aq.matmul(&e.vectors);
        let theta_max = e.values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let done = (0..dim).all(|j| {
            let r: Vec<f64> = ax.col(j).iter().zip(x.col(j)).map(|(a, b)| a - e.values[j] * b).collect();
            norm(&r) <= tol * theta_max
        });
        if done {
            return Ok((e.values[..dim].to_vec(), x.col_range(0, dim)));
        }
    }
    bail!("subspace iteration did not converge")
}
