use crate::linalg::dense::solve_upper;
use crate::linalg::{axpy, dot, thin_qr, DenseMatrix, SymOperator};
use crate::{Error, Result};

/// Recycled subspace `range(W)` with `K W = C R`, `C` orthonormal and `R`
/// upper triangular.
#[derive(Debug, Clone)]
pub struct RecycleSpace {
    w: DenseMatrix,
    c: DenseMatrix,
    r: DenseMatrix,
}

impl RecycleSpace {
    pub fn empty(n: usize) -> Self {
        Self {
            w: DenseMatrix::zeros(n, 0),
            c: DenseMatrix::zeros(n, 0),
            r: DenseMatrix::zeros(0, 0),
        }
    }

    /// Computes `K W` (one operator application per column) and its thin QR.
    /// Columns whose image is numerically dependent on the previous ones are
    /// dropped until `R` is nonsingular.
    pub fn from_basis(op: &impl SymOperator, w: &DenseMatrix) -> Result<Self> {
        if w.rows() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: w.rows(),
            });
        }
        let w = w.clone();
        let mut kw = DenseMatrix::zeros(w.rows(), 0);
        for col in w.columns() {
            kw.push_col(&op.apply_vec(col));
        }
        Self::from_image(w, kw)
    }

    /// As [`from_basis`](Self::from_basis) with a precomputed image `K W`.
    pub fn from_image(mut w: DenseMatrix, mut kw: DenseMatrix) -> Result<Self> {
        loop {
            if w.cols() == 0 {
                return Ok(Self::empty(w.rows()));
            }
            match thin_qr(&kw) {
                Ok(f) => return Ok(Self { w, c: f.q, r: f.r }),
                Err(Error::RankDeficient { column, .. }) => {
                    let keep: Vec<usize> = (0..w.cols()).filter(|&j| j != column).collect();
                    w = w.select_cols(&keep);
                    kw = kw.select_cols(&keep);
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn k(&self) -> usize {
        self.w.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.k() == 0
    }

    pub fn w(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// `‖K W − C R‖_F` and `‖CᵀC − I‖_F` (costs `k` operator applications).
    pub fn check(&self, op: &impl SymOperator) -> (f64, f64) {
        let cr = self.c.matmul(&self.r);
        let mut e = 0.0;
        for j in 0..self.k() {
            let kw = op.apply_vec(self.w.col(j));
            e += kw.iter().zip(cr.col(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        (e.sqrt(), self.c.orthogonality_error())
    }

    /// `R⁻¹ x`.
    pub fn solve_r(&self, x: &[f64]) -> Vec<f64> {
        solve_upper(&self.r, x)
    }

    /// Removes the `range(C)` component of `v` by modified Gram-Schmidt and
    /// returns the coefficients `Cᵀ v`.
    pub fn project_out(&self, v: &mut [f64]) -> Vec<f64> {
        let mut coef = Vec::with_capacity(self.k());
        for c in self.c.columns() {
            let a = dot(c, v);
            axpy(-a, c, v);
            coef.push(a);
        }
        coef
    }

    /// Minimum-residual correction from `range(W)`:
    /// `u0' = u0 + W R⁻¹ Cᵀ r0`, `r0' = (I − C Cᵀ) r0`.
    pub fn project_initial_guess(&self, u0: &[f64], r0: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut r = r0.to_vec();
        let coef = self.project_out(&mut r);
        let z = self.solve_r(&coef);
        let mut u = u0.to_vec();
        for (j, &zj) in z.iter().enumerate() {
            axpy(zj, self.w.col(j), &mut u);
        }
        (u, r)
    }
}

/// Free-function form of [`RecycleSpace::project_initial_guess`].
pub fn project_initial_guess(rs: &RecycleSpace, u0: &[f64], r0: &[f64]) -> (Vec<f64>, Vec<f64>) {
    rs.project_initial_guess(u0, r0)
}
