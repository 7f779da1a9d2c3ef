//! Reference routines for unit tests. Kept independent of the production
//! kernels they check.

use super::dense::DenseMatrix;
use rand::{rngs::StdRng, Rng, SeedableRng};

pub fn random_block(m: usize, k: usize, seed: u64) -> DenseMatrix {
    let mut rng = StdRng::seed_from_u64(seed);
    DenseMatrix::from_fn(m, k, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let mut a = random_block(n, n, seed);
    a.symmetrize();
    a
}

/// Cyclic Jacobi eigenvalues, ascending.
pub fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    jacobi_eig(a).0
}

/// Cyclic Jacobi eigen-decomposition (values ascending, vectors as columns).
pub fn jacobi_eig(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() < 1e-15 * m.frobenius_norm().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| m[(x, x)].total_cmp(&m[(y, y)]));
    let vals = idx.iter().map(|&i| m[(i, i)]).collect();
    (vals, v.select_cols(&idx))
}

/// Random orthogonal matrix from the QR of a Gaussian-ish block.
pub fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    super::qr::thin_qr(&random_block(n, n, seed)).unwrap().q
}

/// `Q diag(spectrum) Qᵀ` with a random orthogonal `Q`.
pub fn with_spectrum(spectrum: &[f64], seed: u64) -> DenseMatrix {
    let n = spectrum.len();
    let q = random_orthogonal(n, seed);
    let mut a = q.matmul(&DenseMatrix::diag(spectrum)).matmul(&q.transpose());
    a.symmetrize();
    a
}
