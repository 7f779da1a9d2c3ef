//! Compressed-sparse-row storage for symmetric matrices.

use crate::{Error, Result};

/// A symmetric linear operator acting on `dim()`-vectors.
pub trait SymOperator {
    fn dim(&self) -> usize;

    /// `y = A x`. Callers guarantee `x.len() == y.len() == dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

/// Symmetric sparse matrix stored with both triangles in CSR layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetry_verified: bool,
}

impl SparseSymMatrix {
    /// Build from raw CSR arrays. Checks structural invariants (offsets
    /// nondecreasing, sorted unique columns) but not symmetry; call
    /// [`verify_symmetry`](Self::verify_symmetry) for that.
    pub fn from_csr(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets length/start".into()));
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::InvalidStructure("nnz mismatch".into()));
        }
        for i in 0..n {
            if row_offsets[i + 1] < row_offsets[i] {
                return Err(Error::InvalidStructure(format!("row_offsets decrease at {i}")));
            }
            let row = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!("row {i} not strictly sorted")));
            }
            if row.last().is_some_and(|&c| c >= n) {
                return Err(Error::InvalidStructure(format!("column out of range in row {i}")));
            }
        }
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values,
            symmetry_verified: false,
        })
    }

    /// Build from `(row, col, value)` triplets, summing duplicates in the
    /// order given. Both triangles must be supplied.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidStructure(format!("entry ({i}, {j}) out of range")));
            }
        }
        // Stable: duplicates are summed in insertion order.
        order.sort_by_key(|&t| (triplets[t].0, triplets[t].1));
        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for t in order {
            let (i, j, v) = triplets[t];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::from_csr(n, row_offsets, col_indices, values)
    }

    /// Build from a symmetric dense matrix (entries with |a| > 0 kept).
    pub fn from_dense(a: &super::DenseMatrix) -> Result<Self> {
        let n = a.rows();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(n, &t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: d.to_vec(),
            symmetry_verified: true,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn symmetry_verified(&self) -> bool {
        self.symmetry_verified
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[r.clone()], &self.values[r])
    }

    /// Entry `(i, j)` or 0 when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Checks exact structural and numerical symmetry; marks the matrix
    /// verified on success.
    pub fn verify_symmetry(&mut self) -> Result<()> {
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (cj, vj) = self.row(j);
                match cj.binary_search(&i) {
                    Ok(p) if vj[p] == v => {}
                    _ => return Err(Error::NotSymmetric { row: i, col: j }),
                }
            }
        }
        self.symmetry_verified = true;
        Ok(())
    }

    /// `K x`, checking dimensions.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = K x` with sequential row reductions (deterministic).
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                s += v * x[j];
            }
            *yi = s;
        }
    }

    /// Symmetric permutation `P K Pᵀ` where row `i` of the result is row
    /// `perm[i]` of `K`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let inv = invert_permutation(perm, self.n)?;
        let mut row_offsets = Vec::with_capacity(self.n + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        let mut buf: Vec<(usize, f64)> = Vec::new();
        for &old in perm {
            let (cols, vals) = self.row(old);
            buf.clear();
            buf.extend(cols.iter().zip(vals).map(|(&c, &v)| (inv[c], v)));
            buf.sort_by_key(|e| e.0);
            for &(c, v) in &buf {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n: self.n,
            row_offsets,
            col_indices,
            values,
            symmetry_verified: self.symmetry_verified,
        })
    }

    /// max |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .map(|i| {
                let (cols, _) = self.row(i);
                cols.iter().map(|&j| i.abs_diff(j)).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Frobenius norm of the stored entries.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense copy (small matrices / oracles only).
    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Lower triangle (including diagonal) as per-row `(col, value)` lists.
    pub fn lower_rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter()
                    .zip(vals)
                    .filter(|(&j, _)| j <= i)
                    .map(|(&j, &v)| (j, v))
                    .collect()
            })
            .collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Adjacency lists (off-diagonal structure) of the matrix graph.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| self.row(i).0.iter().copied().filter(|&j| j != i).collect())
            .collect()
    }
}

impl SymOperator for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
}

impl SymOperator for super::DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.matvec(x));
    }
}

pub fn invert_permutation(perm: &[usize], n: usize) -> Result<Vec<usize>> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: perm.len(),
        });
    }
    let mut inv = vec![usize::MAX; n];
    for (i, &p) in perm.iter().enumerate() {
        if p >= n || inv[p] != usize::MAX {
            return Err(Error::InvalidStructure("not a permutation".into()));
        }
        inv[p] = i;
    }
    Ok(inv)
}
