use super::decomposition::KrylovDecomposition;
use crate::linalg::{axpy, dot, norm, real_schur_ordered, DenseMatrix, OrderedSchur, SchurOrdering, SymOperator};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KsConfig {
    /// Maximum number of cycles.
    pub cycles: usize,
    /// Dimension reached by the Arnoldi extension.
    pub m: usize,
    /// Retained dimension.
    pub k: usize,
    /// Residual tolerance relative to the largest Ritz magnitude seen.
    pub conv_tol: f64,
    pub ordering: SchurOrdering,
    /// Keep `U = ŨV` unformed after the initialization and orthogonalize the
    /// first extension against `Ũ`.
    pub lazy_first_basis: bool,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self {
            cycles: 2,
            m: 45,
            k: 15,
            conv_tol: 2e-8,
            ordering: SchurOrdering::SmallestMagnitudeFirst,
            lazy_first_basis: false,
        }
    }
}

impl KsConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 || self.k >= self.m {
            return Err(Error::InvalidConfig(format!("need 0 < k < m, got k = {}, m = {}", self.k, self.m)));
        }
        if self.m + 1 > n {
            return Err(Error::InvalidConfig(format!("m + 1 = {} exceeds n = {n}", self.m + 1)));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::InvalidConfig("conv_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics of one cycle.
#[derive(Debug, Clone)]
pub struct CycleInfo {
    pub matvecs: usize,
    /// An Arnoldi step produced no new direction; a fresh orthogonal vector
    /// was used to continue.
    pub breakdown: bool,
    /// Eigenvalues of the corrected `m×m` Rayleigh quotient in Schur order.
    pub ritz: Vec<(f64, f64)>,
    /// `‖R‖_F` on entry and after the correction (before truncation).
    pub residual_before: f64,
    pub residual_corrected: f64,
    /// Schur vectors retained in the new decomposition (`k−1`, or `k` when a
    /// 2×2 block straddles the cut).
    pub retained: usize,
    /// The `k` (or `k+1`) leading Schur vectors `U_m X`.
    pub block: DenseMatrix,
    /// Residual norm of each column of `block`.
    pub residual_norms: Vec<f64>,
}

/// Smallest cut `≥ requested` that keeps 2×2 blocks whole.
pub(crate) fn cut_including(s: &OrderedSchur, requested: usize) -> usize {
    let c = s.admissible_cut(requested);
    if c == requested {
        c
    } else {
        requested + 1
    }
}

/// Orthogonalizes `t` against the columns of `first` and the vectors of
/// `rest` (modified Gram-Schmidt), adding the coefficients to `coef`.
fn mgs_pass(first: &DenseMatrix, rest: &[Vec<f64>], t: &mut [f64], coef: &mut [f64]) {
    let p = first.cols();
    for (i, c) in first.columns().enumerate() {
        let a = dot(c, t);
        axpy(-a, c, t);
        coef[i] += a;
    }
    for (i, v) in rest.iter().enumerate() {
        let a = dot(v, t);
        axpy(-a, v, t);
        coef[p + i] += a;
    }
}

/// Unit vector orthogonal to the given basis, built deterministically from
/// coordinate vectors.
fn fresh_direction(first: &DenseMatrix, rest: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    let mut scratch = vec![0.0; first.cols() + rest.len()];
    for e in 0..n {
        let mut t = vec![0.0; n];
        t[e] = 1.0;
        for _ in 0..2 {
            mgs_pass(first, rest, &mut t, &mut scratch);
        }
        let nt = norm(&t);
        if nt > 0.5 {
            t.iter_mut().for_each(|x| *x /= nt);
            return Ok(t);
        }
    }
    Err(Error::InvalidStructure("no direction orthogonal to the Krylov basis".into()))
}

/// One warm-start Krylov-Schur cycle: extend to `m+1` vectors by Arnoldi,
/// correct the Rayleigh quotient by `U_cᵀR`, order its real Schur form and
/// truncate to the leading `k−1` Schur vectors plus `u_{m+1}`.
pub fn ks_cycle(op: &impl SymOperator, d: &KrylovDecomposition, cfg: &KsConfig) -> Result<(KrylovDecomposition, CycleInfo)> {
    let n = op.dim();
    cfg.validate(n)?;
    let p = d.dim();
    let m = cfg.m;
    if p == 0 || p > m {
        return Err(Error::InvalidConfig(format!("decomposition of dimension {p} cannot be extended to m = {m}")));
    }
    let first = &d.base;
    let rot = d.rotation.as_ref();
    let residual_before = d.residual_norm();

    // u_p in explicit form.
    let up = match rot {
        Some(v) => first.matvec(v.col(p - 1)),
        None => first.col(p - 1).to_vec(),
    };

    let mut h = DenseMatrix::zeros(m + 1, m);
    for j in 0..p - 1 {
        for i in 0..p {
            h[(i, j)] = d.hbar[(i, j)];
        }
    }
    let mut new_vecs: Vec<Vec<f64>> = Vec::with_capacity(m + 1 - p);
    let mut matvecs = 0;
    let mut breakdown = false;
    for i in p..=m {
        let x = if i == p { &up } else { &new_vecs[i - p - 1] };
        let mut t = op.apply_vec(x);
        matvecs += 1;
        let t0 = norm(&t);
        let mut coef = vec![0.0; i];
        mgs_pass(first, &new_vecs, &mut t, &mut coef);
        let mut beta = norm(&t);
        // Second pass when cancellation exceeds 1/√2.
        if beta < std::f64::consts::FRAC_1_SQRT_2 * t0 {
            mgs_pass(first, &new_vecs, &mut t, &mut coef);
            beta = norm(&t);
        }
        if let Some(v) = rot {
            let c = v.tr_matvec(&coef[..p]);
            coef[..p].copy_from_slice(&c);
        }
        for (r, &c) in coef.iter().enumerate() {
            h[(r, i - 1)] = c;
        }
        if beta <= 1e2 * f64::EPSILON * t0 {
            breakdown = true;
            h[(i, i - 1)] = 0.0;
            new_vecs.push(fresh_direction(first, &new_vecs, n)?);
        } else {
            h[(i, i - 1)] = beta;
            t.iter_mut().for_each(|x| *x /= beta);
            new_vecs.push(t);
        }
    }

    // Rayleigh-quotient correction and residual update with U_c = u_{p+1..m+1}.
    let mut r = d.rres.clone();
    for j in 0..p - 1 {
        let coefs: Vec<f64> = new_vecs.iter().map(|u| dot(u, r.col(j))).collect();
        let rc = r.col_mut(j);
        for (l, (u, &c)) in new_vecs.iter().zip(&coefs).enumerate() {
            h[(p + l, j)] = c;
            axpy(-c, u, rc);
        }
    }
    let residual_corrected = r.frobenius_norm();

    let hm = h.block(0, m, 0, m);
    let schur = real_schur_ordered(&hm, cfg.ordering)?;
    let cut1 = if cfg.k > 1 { cut_including(&schur, cfg.k - 1) } else { 0 };
    let cut2 = cut_including(&schur, cfg.k);
    let xs = schur.x.col_range(0, cut2);

    // U_m X[:, :cut2].
    let xtop = xs.block(0, p, 0, cut2);
    let mut block = match rot {
        Some(v) => first.matmul(&v.matmul(&xtop)),
        None => first.matmul(&xtop),
    };
    for j in 0..cut2 {
        let bc = block.col_mut(j);
        for l in 0..m - p {
            let c = xs[(p + l, j)];
            if c != 0.0 {
                axpy(c, &new_vecs[l], bc);
            }
        }
    }
    let u_next = new_vecs.pop().expect("at least one Arnoldi step");
    let rx = if p > 1 { r.matmul(&xs.block(0, p - 1, 0, cut2)) } else { DenseMatrix::zeros(n, cut2) };
    let hrow: Vec<f64> = (0..cut2).map(|j| (0..m).map(|l| h[(m, l)] * xs[(l, j)]).sum()).collect();
    let residual_norms = (0..cut2).map(|j| (hrow[j] * hrow[j] + norm(rx.col(j)).powi(2)).sqrt()).collect();

    let mut u = block.col_range(0, cut1);
    u.push_col(&u_next);
    let mut hbar = DenseMatrix::zeros(cut1 + 1, cut1);
    for j in 0..cut1 {
        for i in 0..cut1 {
            hbar[(i, j)] = schur.gamma[(i, j)];
        }
        hbar[(cut1, j)] = hrow[j];
    }
    let rres = rx.col_range(0, cut1);
    Ok((
        KrylovDecomposition {
            base: u,
            rotation: None,
            hbar,
            rres,
        },
        CycleInfo {
            matvecs,
            breakdown,
            ritz: schur.eigenvalues,
            residual_before,
            residual_corrected,
            retained: cut1,
            block,
            residual_norms,
        },
    ))
}
