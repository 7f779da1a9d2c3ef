//! Thin SVD by one-sided Jacobi rotations.

use super::dense::{dot, norm, DenseMatrix};
use super::symeig::sym_eig;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// Left singular vectors, `rows x cols`.
    pub phi: DenseMatrix,
    /// Singular values, nonincreasing.
    pub omega: Vec<f64>,
    /// Right singular vectors, `cols x cols`.
    pub psi: DenseMatrix,
}

/// Thin SVD `A = Φ diag(Ω) Ψᵀ` for `rows >= cols`.
pub fn thin_svd(a: &DenseMatrix) -> Result<ThinSvd> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m,
        });
    }
    let mut u = a.clone();
    let mut v = DenseMatrix::identity(n);
    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(u.col(p), u.col(p));
                let beta = dot(u.col(q), u.col(q));
                let gamma = dot(u.col(p), u.col(q));
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut omega: Vec<f64> = (0..n).map(|j| norm(u.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| omega[y].total_cmp(&omega[x]));
    omega = order.iter().map(|&j| omega[j]).collect();
    let psi = v.select_cols(&order);
    let mut phi = u.select_cols(&order);

    let smax = omega.first().copied().unwrap_or(0.0);
    let mut filled = vec![false; n];
    for j in 0..n {
        if omega[j] > smax * 1e-300 && omega[j] > 0.0 {
            let s = omega[j];
            phi.col_mut(j).iter_mut().for_each(|x| *x /= s);
            filled[j] = true;
        }
    }
    complete_orthonormal(&mut phi, &filled);
    Ok(ThinSvd { phi, omega, psi })
}

fn rotate(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let (cp, cq) = m.two_cols_mut(p, q);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Replace the columns not marked `filled` by unit vectors orthogonalized
/// against everything already present.
fn complete_orthonormal(q: &mut DenseMatrix, filled: &[bool]) {
    let m = q.rows();
    let mut next_unit = 0;
    for j in 0..q.cols() {
        if filled[j] {
            continue;
        }
        loop {
            let mut e = vec![0.0; m];
            e[next_unit % m] = 1.0;
            next_unit += 1;
            for _ in 0..2 {
                for i in 0..q.cols() {
                    if i == j || !(filled[i] || i < j) {
                        continue;
                    }
                    let s = dot(q.col(i), &e);
                    e.iter_mut().zip(q.col(i)).for_each(|(x, y)| *x -= s * y);
                }
            }
            let nrm = norm(&e);
            if nrm > 1e-8 {
                e.iter_mut().for_each(|x| *x /= nrm);
                q.set_col(j, &e);
                break;
            }
        }
    }
}

/// Singular values and right singular vectors of a tall block from the
/// eigen-decomposition of its Gram matrix. Cheaper than [`thin_svd`]
/// (`~n k²` flops plus a small eigenproblem) and accurate for the dominant
/// singular directions, which is what the Krylov decomposition needs.
pub fn right_singular_gram(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let k = a.cols();
    let mut g = DenseMatrix::zeros(k, k);
    for j in 0..k {
        for i in j..k {
            let v = dot(a.col(i), a.col(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let eig = sym_eig(&g)?;
    let order: Vec<usize> = (0..k).rev().collect();
    let sigma = order.iter().map(|&i| eig.values[i].max(0.0).sqrt()).collect();
    Ok((sigma, eig.vectors.select_cols(&order)))
}
