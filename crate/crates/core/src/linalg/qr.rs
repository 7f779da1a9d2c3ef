//! Unblocked Householder thin QR.

use super::dense::{axpy, dot, norm, DenseMatrix};
use crate::{Error, Result};

/// Relative threshold on `|r_jj| / ‖A‖_F` below which a block is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ThinQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Thin QR `A = Q R` with `R` upper triangular and nonnegative diagonal.
///
/// Fails with [`Error::RankDeficient`] naming the first column whose
/// diagonal falls below `RANK_TOL * ‖A‖_F`; the caller decides whether to
/// drop it.
pub fn thin_qr(a: &DenseMatrix) -> Result<ThinQr> {
    let (m, k) = (a.rows(), a.cols());
    if m < k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: m,
        });
    }
    let anorm = a.frobenius_norm();
    let mut work = a.clone();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = DenseMatrix::zeros(k, k);

    for j in 0..k {
        let x = &work.col(j)[j..];
        let alpha = norm(x);
        let mut v = x.to_vec();
        let diag;
        if x[1..].iter().all(|&e| e == 0.0) {
            // Already reduced: no reflection.
            diag = x[0];
            v.iter_mut().for_each(|e| *e = 0.0);
        } else {
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            diag = -sign * alpha;
            v[0] -= diag;
            let vnorm = norm(&v);
            v.iter_mut().for_each(|e| *e /= vnorm);
        }
        // Apply H = I - 2 v vᵀ to the trailing columns.
        for c in j + 1..k {
            let col = &mut work.col_mut(c)[j..];
            let s = dot(&v, col);
            if s != 0.0 {
                axpy(-2.0 * s, &v, col);
            }
        }
        r[(j, j)] = diag;
        for c in j + 1..k {
            r[(j, c)] = work[(j, c)];
        }
        vs.push(v);
    }

    // Explicit Q: apply reflectors in reverse to the leading k columns of I.
    let mut q = DenseMatrix::eye(m, k);
    for j in (0..k).rev() {
        let v = &vs[j];
        for c in j..k {
            let col = &mut q.col_mut(c)[j..];
            let s = dot(v, col);
            if s != 0.0 {
                axpy(-2.0 * s, v, col);
            }
        }
    }

    // Nonnegative diagonal.
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for c in j..k {
                r[(j, c)] = -r[(j, c)];
            }
            q.col_mut(j).iter_mut().for_each(|e| *e = -*e);
        }
    }

    for j in 0..k {
        if r[(j, j)] < RANK_TOL * anorm || anorm == 0.0 {
            return Err(Error::RankDeficient {
                column: j,
                value: r[(j, j)],
            });
        }
    }
    Ok(ThinQr { q, r })
}

/// Orthonormal basis of `range(A)`: columns flagged rank deficient by
/// [`thin_qr`] are dropped one at a time until the remainder factors.
/// Returns the basis and the indices of the kept columns.
pub fn orthonormal_range(a: &DenseMatrix) -> (DenseMatrix, Vec<usize>) {
    let mut kept: Vec<usize> = (0..a.cols()).collect();
    loop {
        if kept.is_empty() {
            return (DenseMatrix::zeros(a.rows(), 0), kept);
        }
        let sub = a.select_cols(&kept);
        match thin_qr(&sub) {
            Ok(f) => return (f.q, kept),
            Err(Error::RankDeficient { column, .. }) => {
                kept.remove(column);
            }
            Err(_) => return (DenseMatrix::zeros(a.rows(), 0), Vec::new()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn random_block(m: usize, k: usize, seed: u64) -> DenseMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        DenseMatrix::from_fn(m, k, |_, _| rng.gen_range(-1.0..1.0))
    }

    /// Modified Gram-Schmidt, used only as an independent reference.
    fn mgs(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
        let k = a.cols();
        let mut q = a.clone();
        let mut r = DenseMatrix::zeros(k, k);
        for j in 0..k {
            for i in 0..j {
                let s: f64 = q.col(i).iter().zip(q.col(j)).map(|(x, y)| x * y).sum();
                r[(i, j)] = s;
                let qi = q.col(i).to_vec();
                q.col_mut(j).iter_mut().zip(qi).for_each(|(x, y)| *x -= s * y);
            }
            let nrm = q.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            r[(j, j)] = nrm;
            q.col_mut(j).iter_mut().for_each(|x| *x /= nrm);
        }
        (q, r)
    }

    #[test]
    fn orthonormal_input_is_fixed_point() {
        let f = thin_qr(&DenseMatrix::eye(5, 3)).unwrap();
        assert!(f.q.sub(&DenseMatrix::eye(5, 3)).max_abs() < 1e-15);
        assert!(f.r.sub(&DenseMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn single_column_normalization() {
        let a = DenseMatrix::from_col_major(2, 1, vec![3.0, 4.0]).unwrap();
        let f = thin_qr(&a).unwrap();
        assert!((f.q[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((f.q[(1, 0)] - 0.8).abs() < 1e-15);
        assert!((f.r[(0, 0)] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn random_block_matches_mgs_reference() {
        let a = random_block(40, 6, 11);
        let f = thin_qr(&a).unwrap();
        let recon = f.q.matmul(&f.r);
        assert!(recon.sub(&a).frobenius_norm() <= 1e-12 * a.frobenius_norm());
        assert!(f.q.orthogonality_error() <= 1e-12 * 6.0);
        let (_, r_ref) = mgs(&a);
        assert!(f.r.sub(&r_ref).max_abs() < 1e-11);
    }

    #[test]
    fn rank_deficiency_is_signaled() {
        let mut a = random_block(10, 3, 2);
        let c0 = a.col(0).to_vec();
        a.set_col(2, &c0);
        match thin_qr(&a) {
            Err(Error::RankDeficient { column, .. }) => assert_eq!(column, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let (q, kept) = orthonormal_range(&a);
        assert_eq!(kept, vec![0, 1]);
        assert_eq!(q.cols(), 2);
    }

    proptest::proptest! {
        #[test]
        fn q_is_orthonormal(seed in 0u64..500, m in 5usize..60, k in 1usize..5) {
            let a = random_block(m, k, seed);
            let f = thin_qr(&a).unwrap();
            proptest::prop_assert!(f.q.orthogonality_error() <= 1e-12 * k as f64);
            for j in 0..k { proptest::prop_assert!(f.r[(j, j)] >= 0.0); }
        }
    }
}
