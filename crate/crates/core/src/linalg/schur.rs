//! Ordered real Schur decomposition of small dense matrices.
//!
//! Nearly symmetric input goes through the symmetric eigensolver and a
//! sort. Everything else is reduced to Hessenberg form, iterated with the
//! Francis double shift, and reordered by swapping adjacent diagonal blocks
//! (Sylvester equation plus an orthogonal basis change).

use super::dense::{lu_solve, DenseMatrix};
use super::symeig::sym_eig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchurOrdering {
    #[default]
    SmallestMagnitudeFirst,
    SmallestRealFirst,
}

impl SchurOrdering {
    fn key(self, re: f64, im: f64) -> f64 {
        match self {
            SchurOrdering::SmallestMagnitudeFirst => re.hypot(im),
            SchurOrdering::SmallestRealFirst => re,
        }
    }
}

/// `H = X Γ Xᵀ` with the eigenvalues along the block diagonal of `Γ` in the
/// requested order.
#[derive(Debug, Clone)]
pub struct OrderedSchur {
    pub x: DenseMatrix,
    pub gamma: DenseMatrix,
    /// Eigenvalues `(re, im)` in diagonal order.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Sizes (1 or 2) of the diagonal blocks, top to bottom.
    pub block_sizes: Vec<usize>,
    /// True when the symmetric path was taken.
    pub symmetric: bool,
}

impl OrderedSchur {
    /// Largest truncation index `≤ requested` that does not split a 2×2
    /// block.
    pub fn admissible_cut(&self, requested: usize) -> usize {
        let mut pos = 0;
        for &s in &self.block_sizes {
            if pos + s > requested {
                break;
            }
            pos += s;
        }
        pos
    }
}

/// Relative asymmetry below which the symmetric path is used.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn real_schur_ordered(h: &DenseMatrix, ordering: SchurOrdering) -> Result<OrderedSchur> {
    let n = h.rows();
    if n != h.cols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.cols(),
        });
    }
    let hn = h.frobenius_norm();
    if h.asymmetry() <= SYMMETRY_TOL * hn.max(f64::MIN_POSITIVE) {
        return symmetric_schur(h, ordering);
    }
    general_schur(h, ordering)
}

fn symmetric_schur(h: &DenseMatrix, ordering: SchurOrdering) -> Result<OrderedSchur> {
    let mut s = h.clone();
    s.symmetrize();
    let eig = sym_eig(&s)?;
    let n = eig.values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ordering
            .key(eig.values[a], 0.0)
            .total_cmp(&ordering.key(eig.values[b], 0.0))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.values[i]).collect();
    Ok(OrderedSchur {
        x: eig.vectors.select_cols(&order),
        gamma: DenseMatrix::diag(&values),
        eigenvalues: values.iter().map(|&v| (v, 0.0)).collect(),
        block_sizes: vec![1; n],
        symmetric: true,
    })
}

/// Unordered real Schur form via the general path, exposed for tests and
/// for callers that want to skip the symmetric shortcut.
pub fn real_schur_general(h: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix, Vec<usize>)> {
    let n = h.rows();
    let mut t = h.clone();
    let mut z = DenseMatrix::identity(n);
    hessenberg(&mut t, &mut z);
    francis(&mut t, &mut z)?;
    let blocks = block_structure(&t);
    Ok((z, t, blocks))
}

fn general_schur(h: &DenseMatrix, ordering: SchurOrdering) -> Result<OrderedSchur> {
    let (mut z, mut t, mut blocks) = real_schur_general(h)?;

    // Bubble sort of diagonal blocks by key.
    let mut changed = true;
    let mut passes = 0;
    while changed && passes <= blocks.len() {
        changed = false;
        passes += 1;
        let mut pos = 0;
        let mut i = 0;
        while i + 1 < blocks.len() {
            let (n1, n2) = (blocks[i], blocks[i + 1]);
            let k1 = block_key(&t, pos, n1, ordering);
            let k2 = block_key(&t, pos + n1, n2, ordering);
            if k2 < k1 && swap_blocks(&mut t, &mut z, pos, n1, n2) {
                let mut replacement = Vec::new();
                replacement.extend(standardize_or_split(&mut t, &mut z, pos, n2));
                replacement.extend(standardize_or_split(&mut t, &mut z, pos + n2, n1));
                blocks.splice(i..i + 2, replacement);
                changed = true;
            }
            pos += blocks[i];
            i += 1;
        }
    }

    let mut eigenvalues = Vec::with_capacity(t.rows());
    let mut pos = 0;
    for &s in &blocks {
        if s == 1 {
            eigenvalues.push((t[(pos, pos)], 0.0));
        } else {
            let (re, im) = block2_eigen(&t, pos);
            eigenvalues.push((re, im));
            eigenvalues.push((re, -im));
        }
        pos += s;
    }
    Ok(OrderedSchur {
        x: z,
        gamma: t,
        eigenvalues,
        block_sizes: blocks,
        symmetric: false,
    })
}

fn block_key(t: &DenseMatrix, pos: usize, size: usize, ordering: SchurOrdering) -> f64 {
    if size == 1 {
        ordering.key(t[(pos, pos)], 0.0)
    } else {
        let (re, im) = block2_eigen(t, pos);
        ordering.key(re, im)
    }
}

/// Real part and positive imaginary part of a complex-pair 2×2 block.
fn block2_eigen(t: &DenseMatrix, l: usize) -> (f64, f64) {
    let (a, b, c, d) = (t[(l, l)], t[(l, l + 1)], t[(l + 1, l)], t[(l + 1, l + 1)]);
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    (0.5 * (a + d), (-disc).max(0.0).sqrt())
}

fn block_structure(t: &DenseMatrix) -> Vec<usize> {
    let n = t.rows();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            blocks.push(2);
            i += 2;
        } else {
            blocks.push(1);
            i += 1;
        }
    }
    blocks
}

/// Householder vector `v` (with `v[0] = 1`) and `beta` such that
/// `(I - beta v vᵀ) x = ±‖x‖ e1`.
fn house(x: &[f64]) -> (Vec<f64>, f64) {
    let sigma: f64 = x[1..].iter().map(|e| e * e).sum();
    let mut v = x.to_vec();
    v[0] = 1.0;
    if sigma == 0.0 {
        return (v, 0.0);
    }
    let mu = (x[0] * x[0] + sigma).sqrt();
    let v0 = if x[0] <= 0.0 {
        x[0] - mu
    } else {
        -sigma / (x[0] + mu)
    };
    let beta = 2.0 * v0 * v0 / (sigma + v0 * v0);
    for e in v[1..].iter_mut() {
        *e /= v0;
    }
    (v, beta)
}

/// `A[r0.., cols] ← (I - beta v vᵀ) A[r0.., cols]`.
fn reflect_rows(a: &mut DenseMatrix, v: &[f64], beta: f64, r0: usize, cols: std::ops::Range<usize>) {
    if beta == 0.0 {
        return;
    }
    for j in cols {
        let mut s = 0.0;
        for (i, vi) in v.iter().enumerate() {
            s += vi * a[(r0 + i, j)];
        }
        s *= beta;
        for (i, vi) in v.iter().enumerate() {
            a[(r0 + i, j)] -= s * vi;
        }
    }
}

/// `A[rows, c0..] ← A[rows, c0..] (I - beta v vᵀ)`.
fn reflect_cols(a: &mut DenseMatrix, v: &[f64], beta: f64, c0: usize, rows: std::ops::Range<usize>) {
    if beta == 0.0 {
        return;
    }
    for i in rows {
        let mut s = 0.0;
        for (j, vj) in v.iter().enumerate() {
            s += a[(i, c0 + j)] * vj;
        }
        s *= beta;
        for (j, vj) in v.iter().enumerate() {
            a[(i, c0 + j)] -= s * vj;
        }
    }
}

fn hessenberg(t: &mut DenseMatrix, z: &mut DenseMatrix) {
    let n = t.rows();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| t[(i, k)]).collect();
        let (v, beta) = house(&x);
        reflect_rows(t, &v, beta, k + 1, k..n);
        reflect_cols(t, &v, beta, k + 1, 0..n);
        reflect_cols(z, &v, beta, k + 1, 0..n);
        for i in k + 2..n {
            t[(i, k)] = 0.0;
        }
    }
}

fn francis(t: &mut DenseMatrix, z: &mut DenseMatrix) -> Result<()> {
    let n = t.rows();
    let eps = f64::EPSILON;
    let tnorm = t.frobenius_norm().max(f64::MIN_POSITIVE);
    let max_sweeps = 100 * n.max(1);
    let mut sweeps = 0;
    let mut hi = n;
    let mut its = 0;
    while hi > 0 {
        let mut l = hi - 1;
        while l > 0 {
            let mut s = t[(l - 1, l - 1)].abs() + t[(l, l)].abs();
            if s == 0.0 {
                s = tnorm;
            }
            if t[(l, l - 1)].abs() < eps * s {
                t[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let size = hi - l;
        if size == 1 {
            hi -= 1;
            its = 0;
            continue;
        }
        if size == 2 {
            standardize_2x2(t, z, l);
            hi -= 2;
            its = 0;
            continue;
        }
        sweeps += 1;
        its += 1;
        if sweeps > max_sweeps {
            return Err(Error::SchurNoConvergence(sweeps));
        }
        let p = hi - 1;
        let (sum, prod) = if its % 10 == 0 {
            let w = t[(p, p - 1)].abs() + t[(p - 1, p - 2)].abs();
            (1.5 * w, w * w)
        } else {
            (
                t[(p - 1, p - 1)] + t[(p, p)],
                t[(p - 1, p - 1)] * t[(p, p)] - t[(p - 1, p)] * t[(p, p - 1)],
            )
        };
        francis_step(t, z, l, p, sum, prod);
    }
    Ok(())
}

fn francis_step(t: &mut DenseMatrix, z: &mut DenseMatrix, l: usize, p: usize, s: f64, tt: f64) {
    let n = t.rows();
    let mut x = t[(l, l)] * t[(l, l)] + t[(l, l + 1)] * t[(l + 1, l)] - s * t[(l, l)] + tt;
    let mut y = t[(l + 1, l)] * (t[(l, l)] + t[(l + 1, l + 1)] - s);
    let mut w = t[(l + 1, l)] * t[(l + 2, l + 1)];
    for k in l..=p - 2 {
        let (v, beta) = house(&[x, y, w]);
        let c0 = if k > l { k - 1 } else { l };
        reflect_rows(t, &v, beta, k, c0..n);
        let r1 = (k + 3).min(p) + 1;
        reflect_cols(t, &v, beta, k, 0..r1);
        reflect_cols(z, &v, beta, k, 0..n);
        if k > l {
            t[(k + 1, k - 1)] = 0.0;
            t[(k + 2, k - 1)] = 0.0;
        }
        x = t[(k + 1, k)];
        y = t[(k + 2, k)];
        if k + 3 <= p {
            w = t[(k + 3, k)];
        }
    }
    let (v, beta) = house(&[x, y]);
    reflect_rows(t, &v, beta, p - 1, (p - 2)..n);
    reflect_cols(t, &v, beta, p - 1, 0..p + 1);
    reflect_cols(z, &v, beta, p - 1, 0..n);
    t[(p, p - 2)] = 0.0;
}

/// Rotate the 2×2 block at `l` to upper triangular form when its
/// eigenvalues are real. Returns true if it remains a complex-pair block.
fn standardize_2x2(t: &mut DenseMatrix, z: &mut DenseMatrix, l: usize) -> bool {
    let (a, b, c, d) = (t[(l, l)], t[(l, l + 1)], t[(l + 1, l)], t[(l + 1, l + 1)]);
    if c == 0.0 {
        return false;
    }
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc < 0.0 {
        return true;
    }
    let r = disc.sqrt();
    let lambda = d + p + if p >= 0.0 { r } else { -r };
    // Eigenvector for lambda.
    let (e0, e1) = {
        let u = (b, lambda - a);
        let w = (lambda - d, c);
        if u.0.hypot(u.1) >= w.0.hypot(w.1) {
            u
        } else {
            w
        }
    };
    let nrm = e0.hypot(e1);
    if nrm == 0.0 {
        return true;
    }
    let (cs, sn) = (e0 / nrm, e1 / nrm);
    let n = t.rows();
    for j in 0..n {
        let (x, y) = (t[(l, j)], t[(l + 1, j)]);
        t[(l, j)] = cs * x + sn * y;
        t[(l + 1, j)] = -sn * x + cs * y;
    }
    for i in 0..n {
        let (x, y) = (t[(i, l)], t[(i, l + 1)]);
        t[(i, l)] = cs * x + sn * y;
        t[(i, l + 1)] = -sn * x + cs * y;
    }
    for i in 0..n {
        let (x, y) = (z[(i, l)], z[(i, l + 1)]);
        z[(i, l)] = cs * x + sn * y;
        z[(i, l + 1)] = -sn * x + cs * y;
    }
    t[(l + 1, l)] = 0.0;
    false
}

fn standardize_or_split(t: &mut DenseMatrix, z: &mut DenseMatrix, pos: usize, size: usize) -> Vec<usize> {
    if size == 2 && !standardize_2x2(t, z, pos) {
        vec![1, 1]
    } else {
        vec![size]
    }
}

/// Swap the adjacent diagonal blocks of sizes `n1`, `n2` starting at `pos`.
/// Returns false (leaving everything untouched) if the Sylvester equation
/// is singular, i.e. the blocks share an eigenvalue.
fn swap_blocks(t: &mut DenseMatrix, z: &mut DenseMatrix, pos: usize, n1: usize, n2: usize) -> bool {
    let n = t.rows();
    let m = n1 + n2;
    // A11 X - X A22 = A12, unknown X (n1 x n2) column-major.
    let dim = n1 * n2;
    let mut kron = DenseMatrix::zeros(dim, dim);
    let mut rhs = vec![0.0; dim];
    for j in 0..n2 {
        for i in 0..n1 {
            let row = j * n1 + i;
            rhs[row] = t[(pos + i, pos + n1 + j)];
            for k in 0..n1 {
                kron[(row, j * n1 + k)] += t[(pos + i, pos + k)];
            }
            for k in 0..n2 {
                kron[(row, k * n1 + i)] -= t[(pos + n1 + k, pos + n1 + j)];
            }
        }
    }
    let Some(xv) = lu_solve(&kron, &rhs) else {
        return false;
    };
    if xv.iter().any(|v| !v.is_finite()) {
        return false;
    }
    // Orthogonal Q whose leading n2 columns span [-X; I].
    let basis = DenseMatrix::from_fn(m, n2, |i, j| {
        if i < n1 {
            -xv[j * n1 + i]
        } else {
            ((i - n1) == j) as u8 as f64
        }
    });
    let q = full_q(&basis);
    // T ← Qᵀ T Q on the affected rows/columns, Z ← Z Q.
    let mut tmp = vec![0.0; m];
    for j in 0..n {
        for (a, slot) in tmp.iter_mut().enumerate() {
            *slot = (0..m).map(|r| q[(r, a)] * t[(pos + r, j)]).sum();
        }
        for a in 0..m {
            t[(pos + a, j)] = tmp[a];
        }
    }
    for mat in [&mut *t, &mut *z] {
        for i in 0..n {
            for (a, slot) in tmp.iter_mut().enumerate() {
                *slot = (0..m).map(|r| mat[(i, pos + r)] * q[(r, a)]).sum();
            }
            for a in 0..m {
                mat[(i, pos + a)] = tmp[a];
            }
        }
    }
    for i in n2..m {
        for j in 0..n2 {
            t[(pos + i, pos + j)] = 0.0;
        }
    }
    true
}

/// Full orthogonal factor of a tall block via Householder reflectors.
fn full_q(a: &DenseMatrix) -> DenseMatrix {
    let (m, k) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut refl = Vec::new();
    for j in 0..k.min(m - 1) {
        let x: Vec<f64> = (j..m).map(|i| w[(i, j)]).collect();
        let (v, beta) = house(&x);
        reflect_rows(&mut w, &v, beta, j, j..k);
        refl.push((j, v, beta));
    }
    let mut q = DenseMatrix::identity(m);
    for (j, v, beta) in refl.iter().rev() {
        reflect_rows(&mut q, v, *beta, *j, 0..m);
    }
    q
}
