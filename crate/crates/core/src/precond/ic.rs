//! Incomplete Cholesky factorizations.

use crate::linalg::{invert_permutation, SparseSymMatrix};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FactorKind {
    Ic0,
    Ict { droptol: f64 },
}

/// Maximum number of diagonal-shift retries after a nonpositive pivot.
pub const MAX_SHIFT_RETRIES: usize = 20;

/// `L Lᵀ ≈ P K Pᵀ` with `L` lower triangular. Rows of `L` are stored with
/// ascending columns and the diagonal last.
#[derive(Debug, Clone)]
pub struct ICFactor {
    n: usize,
    row_offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// `perm[new] = old`.
    pub perm: Vec<usize>,
    pub kind: FactorKind,
    /// Diagonal shift that was needed to avoid breakdown (0 if none).
    pub shift: f64,
}

impl ICFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    /// `L` as a dense lower-triangular block (small cases and tests).
    pub fn to_dense(&self) -> crate::linalg::DenseMatrix {
        let mut d = crate::linalg::DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d[(i, j)] = x;
            }
        }
        d
    }

    /// `x ← L⁻¹ x`.
    pub fn solve_lower(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let (c, v) = self.row(i);
            let last = c.len() - 1;
            let mut s = x[i];
            for t in 0..last {
                s -= v[t] * x[c[t]];
            }
            x[i] = s / v[last];
        }
    }

    /// `x ← L⁻ᵀ x`.
    pub fn solve_upper(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            let (c, v) = self.row(i);
            let last = c.len() - 1;
            x[i] /= v[last];
            let xi = x[i];
            for t in 0..last {
                x[c[t]] -= v[t] * xi;
            }
        }
    }

    /// `x ← Lᵀ x`.
    pub fn mul_upper(&self, x: &mut [f64]) {
        // (Lᵀx)_j = Σ_{i ≥ j} L_ij x_i; rows visited ascending so every x_i
        // is read before it is overwritten.
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &l) in c.iter().zip(v) {
                y[j] += l * x[i];
            }
        }
        x.copy_from_slice(&y);
    }

    /// `x ← L x`.
    pub fn mul_lower(&self, x: &mut [f64]) {
        for i in (0..self.n).rev() {
            let (c, v) = self.row(i);
            x[i] = c.iter().zip(v).map(|(&j, &l)| l * x[j]).sum();
        }
    }

    /// `y = P x` (`y[i] = x[perm[i]]`).
    pub fn permute(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    /// `y = Pᵀ x`.
    pub fn unpermute(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = x[i];
        }
        y
    }

    pub fn write_matrix_market<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, x)?;
            }
        }
        Ok(())
    }
}

/// IC(0) of `K` in its given order.
pub fn ic0(k: &SparseSymMatrix) -> Result<ICFactor> {
    factorize(k, FactorKind::Ic0, None)
}

/// Threshold incomplete Cholesky of `K` in its given order.
pub fn ict(k: &SparseSymMatrix, droptol: f64) -> Result<ICFactor> {
    factorize(k, FactorKind::Ict { droptol }, None)
}

/// Factor `P K Pᵀ` (identity `P` when `perm` is `None`), retrying with a
/// doubling diagonal shift starting at `1e-3 · mean(diag K)` on breakdown.
pub fn factorize(k: &SparseSymMatrix, kind: FactorKind, perm: Option<&[usize]>) -> Result<ICFactor> {
    let n = k.n();
    let perm: Vec<usize> = match perm {
        Some(p) => {
            invert_permutation(p, n)?;
            p.to_vec()
        }
        None => (0..n).collect(),
    };
    let kp = if perm.iter().enumerate().all(|(i, &p)| i == p) {
        k.clone()
    } else {
        k.permute(&perm)?
    };
    let mean_diag = kp.diagonal().iter().sum::<f64>() / n.max(1) as f64;
    let mut shift = 0.0;
    let mut retries = 0;
    loop {
        let attempt = match kind {
            FactorKind::Ic0 => ic0_rows(&kp, shift),
            FactorKind::Ict { droptol } => ict_columns(&kp, droptol, shift),
        };
        match attempt {
            Ok((row_offsets, cols, vals)) => {
                return Ok(ICFactor {
                    n,
                    row_offsets,
                    cols,
                    vals,
                    perm,
                    kind,
                    shift,
                })
            }
            Err(row) => {
                if retries == MAX_SHIFT_RETRIES {
                    return Err(Error::FactorizationBreakdown { row, retries });
                }
                shift = if shift == 0.0 { 1e-3 * mean_diag.abs() } else { 2.0 * shift };
                retries += 1;
            }
        }
    }
}

type Csr = (Vec<usize>, Vec<usize>, Vec<f64>);

/// Row-oriented IC(0): `L` keeps exactly the lower pattern of `K`.
fn ic0_rows(k: &SparseSymMatrix, shift: f64) -> std::result::Result<Csr, usize> {
    let n = k.n();
    let mut row_offsets = vec![0usize; n + 1];
    let mut cols = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    for i in 0..n {
        let (kc, kv) = k.row(i);
        let start = cols.len();
        let mut diag = shift;
        for (&j, &v) in kc.iter().zip(kv) {
            if j < i {
                cols.push(j);
                vals.push(v);
            } else if j == i {
                diag += v;
            }
        }
        // L_ij = (K_ij - Σ_{m<j} L_im L_jm) / L_jj over the fixed pattern.
        for t in start..cols.len() {
            let j = cols[t];
            let (js, je) = (row_offsets[j], row_offsets[j + 1]);
            let mut s = vals[t];
            let (mut a, mut b) = (start, js);
            while a < t && b < je - 1 {
                match cols[a].cmp(&cols[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        s -= vals[a] * vals[b];
                        a += 1;
                        b += 1;
                    }
                }
            }
            vals[t] = s / vals[je - 1];
        }
        let sq: f64 = vals[start..].iter().map(|v| v * v).sum();
        let d = diag - sq;
        if !(d > 0.0) {
            return Err(i);
        }
        cols.push(i);
        vals.push(d.sqrt());
        row_offsets[i + 1] = cols.len();
    }
    Ok((row_offsets, cols, vals))
}

/// Left-looking column ICT. An off-diagonal entry of column `j` is dropped
/// when its value before division by the pivot, `L_ij · L_jj`, is below
/// `droptol · ‖K_{:,j}‖₂`. Both sides scale linearly with `K`, so the factor
/// is scale covariant. The diagonal is always kept.
fn ict_columns(k: &SparseSymMatrix, droptol: f64, shift: f64) -> std::result::Result<Csr, usize> {
    let n = k.n();
    let mut lcols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    // next[c]: position in column c of the first entry with row >= current j.
    let mut next = vec![0usize; n];
    // pending[r]: columns whose next entry lies in row r.
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut w = vec![0.0; n];
    let mut in_pattern = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();

    for j in 0..n {
        let (kc, kv) = k.row(j);
        let colnorm = kv.iter().map(|v| v * v).sum::<f64>().sqrt();
        pattern.clear();
        for (&i, &v) in kc.iter().zip(kv) {
            if i >= j {
                w[i] = v;
                in_pattern[i] = true;
                pattern.push(i);
            }
        }
        if !in_pattern[j] {
            in_pattern[j] = true;
            w[j] = 0.0;
            pattern.push(j);
        }
        w[j] += shift;
        let updating = std::mem::take(&mut pending[j]);
        for &c in &updating {
            let col = &lcols[c];
            let ljc = col[next[c]].1;
            for &(i, lic) in &col[next[c]..] {
                if !in_pattern[i] {
                    in_pattern[i] = true;
                    w[i] = 0.0;
                    pattern.push(i);
                }
                w[i] -= lic * ljc;
            }
        }
        let d = w[j];
        if !(d > 0.0) {
            return Err(j);
        }
        let ljj = d.sqrt();
        pattern.sort_unstable();
        let mut col = Vec::with_capacity(pattern.len());
        col.push((j, ljj));
        for &i in &pattern {
            if i > j {
                if w[i] != 0.0 && w[i].abs() >= droptol * colnorm {
                    col.push((i, w[i] / ljj));
                }
            }
            in_pattern[i] = false;
            w[i] = 0.0;
        }
        lcols.push(col);
        // Advance cursors of the columns used for this row and register the
        // new column.
        for c in updating.into_iter().chain(std::iter::once(j)) {
            next[c] += 1;
            if let Some(&(r, _)) = lcols[c].get(next[c]) {
                pending[r].push(c);
            }
        }
    }

    // Column storage to rows with the diagonal last.
    let mut counts = vec![0usize; n + 1];
    for col in &lcols {
        for &(i, _) in col {
            counts[i + 1] += 1;
        }
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let row_offsets = counts.clone();
    let mut fill = counts;
    let nnz = row_offsets[n];
    let mut cols = vec![0usize; nnz];
    let mut vals = vec![0.0; nnz];
    // Columns ascending, so each row receives ascending columns and its
    // diagonal (column i) last.
    for (j, col) in lcols.iter().enumerate() {
        for &(i, v) in col {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }
    }
    Ok((row_offsets, cols, vals))
}
