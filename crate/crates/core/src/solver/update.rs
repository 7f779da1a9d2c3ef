//! Harmonic-Ritz extraction of a new recycle space from `span{Z_fixed, V}`.

use super::recycle::RecycleSpace;
use crate::linalg::dense::{solve_upper, solve_upper_transposed};
use crate::linalg::{axpy, dot, norm, orthonormal_range, sym_eig, thin_qr, DenseMatrix};
use crate::{Error, Result};

/// Columns whose component outside `range([C, V])` is below this fraction of
/// their norm are treated as lying inside it.
const INSIDE_TOL: f64 = 1e-10;

/// Search space `Z = [Z_fixed, V_Z]` with `K Z_fixed = Y_fixed` stored
/// explicitly and `K V_Z = C B + V T̲` from the augmented Lanczos relation.
/// `vs` holds consecutive Lanczos vectors; the first `lead` of them are not
/// part of `Z` (they only appear in `K V_Z`), followed by the `m` vectors of
/// `V_Z` and at most one trailing vector.
pub(crate) struct SearchSpace<'a> {
    pub zfixed: &'a DenseMatrix,
    pub yfixed: &'a DenseMatrix,
    pub c: &'a DenseMatrix,
    pub vs: &'a [Vec<f64>],
    pub lead: usize,
    pub m: usize,
    /// `vs.len() × m`.
    pub tbar: &'a DenseMatrix,
    /// `k × m`, entries `Cᵀ K v`.
    pub b: &'a DenseMatrix,
}

#[derive(Debug, Clone)]
pub(crate) struct HarmonicRitz {
    pub space: RecycleSpace,
    /// Harmonic Ritz values of the retained vectors, smallest magnitude first.
    pub values: Vec<f64>,
}

/// Harmonic Ritz pairs `(KZ)ᵀ(KZ y − θ Z y) = 0` for the `k_next` values of
/// smallest magnitude (fewer if the search space is smaller). With `Q = [C, vs, Q_x]` orthonormal and
/// `K Z = Q G`, `Φ = Qᵀ Z`, the pencil is `GᵀG y = θ GᵀΦ y`; writing
/// `G = Q_g R_g` it becomes the symmetric problem
/// `Q_gᵀ Φ R_g⁻¹ x = θ⁻¹ x`, `y = R_g⁻¹ x`. No operator applications.
pub(crate) fn harmonic_update(s: &SearchSpace, k_next: usize) -> Result<HarmonicRitz> {
    let n = s.c.rows();
    let (q, k, p, m) = (s.zfixed.cols(), s.c.cols(), s.vs.len(), s.m);
    if k_next == 0 {
        return Ok(HarmonicRitz {
            space: RecycleSpace::empty(n),
            values: Vec::new(),
        });
    }
    // A solve shorter than k_next iterations supplies fewer vectors.
    let k_next = k_next.min(q + m);

    // Part of K Z_fixed outside range([C, vs]).
    let mut extra = DenseMatrix::zeros(n, 0);
    for i in 0..q {
        let y = s.yfixed.col(i);
        let ynorm = norm(y);
        let mut e = y.to_vec();
        for _ in 0..2 {
            for c in s.c.columns() {
                let a = dot(c, &e);
                axpy(-a, c, &mut e);
            }
            for v in s.vs {
                let a = dot(v, &e);
                axpy(-a, v, &mut e);
            }
        }
        if norm(&e) > INSIDE_TOL * ynorm {
            extra.push_col(&e);
        }
    }
    let (qx, _) = orthonormal_range(&extra);
    let x = qx.cols();
    let rows = k + p + x;

    let project = |v: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(rows);
        out.extend(s.c.columns().map(|c| dot(c, v)));
        out.extend(s.vs.iter().map(|w| dot(w, v)));
        out.extend(qx.columns().map(|c| dot(c, v)));
        out
    };

    let cols = q + m;
    let mut g = DenseMatrix::zeros(rows, cols);
    let mut phi = DenseMatrix::zeros(rows, cols);
    for i in 0..q {
        g.set_col(i, &project(s.yfixed.col(i)));
        phi.set_col(i, &project(s.zfixed.col(i)));
    }
    for l in 0..m {
        let gc = g.col_mut(q + l);
        gc[..k].copy_from_slice(s.b.col(l));
        gc[k..k + p].copy_from_slice(s.tbar.col(l));
        phi[(k + s.lead + l, q + l)] = 1.0;
    }

    // Drop columns of Z whose image is dependent.
    let mut kept: Vec<usize> = (0..cols).collect();
    let qr = loop {
        if kept.len() < k_next {
            return Err(Error::RankDeficient {
                column: kept.len(),
                value: 0.0,
            });
        }
        match thin_qr(&g.select_cols(&kept)) {
            Ok(f) => break f,
            Err(Error::RankDeficient { column, .. }) => {
                kept.remove(column);
            }
            Err(e) => return Err(e),
        }
    };
    let d = kept.len();
    let m1 = qr.q.tr_matmul(&phi.select_cols(&kept));
    // H = M1 R_g⁻¹, row by row: R_gᵀ hᵀ = m1ᵀ.
    let mut h = DenseMatrix::zeros(d, d);
    for i in 0..d {
        let row: Vec<f64> = (0..d).map(|j| m1[(i, j)]).collect();
        let sol = solve_upper_transposed(&qr.r, &row);
        for j in 0..d {
            h[(i, j)] = sol[j];
        }
    }
    h.symmetrize();
    let eig = sym_eig(&h)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()).then(a.cmp(&b)));
    order.truncate(k_next);
    let xsel = eig.vectors.select_cols(&order);
    let values: Vec<f64> = order.iter().map(|&i| 1.0 / eig.values[i]).collect();

    // W = Z_kept R_g⁻¹ X, K W = Q (Q_g X).
    let mut w = DenseMatrix::zeros(n, k_next);
    let mut kw = DenseMatrix::zeros(n, k_next);
    let gx = qr.q.matmul(&xsel);
    for j in 0..k_next {
        let y = solve_upper(&qr.r, xsel.col(j));
        let wc = w.col_mut(j);
        for (t, &zi) in kept.iter().enumerate() {
            if y[t] == 0.0 {
                continue;
            }
            let col = if zi < q {
                s.zfixed.col(zi)
            } else {
                s.vs[s.lead + zi - q].as_slice()
            };
            axpy(y[t], col, wc);
        }
        let kc = kw.col_mut(j);
        let coef = gx.col(j);
        for (i, c) in s.c.columns().enumerate() {
            axpy(coef[i], c, kc);
        }
        for (i, v) in s.vs.iter().enumerate() {
            axpy(coef[k + i], v, kc);
        }
        for (i, c) in qx.columns().enumerate() {
            axpy(coef[k + p + i], c, kc);
        }
        let scale = 1.0 / norm(w.col(j));
        w.col_mut(j).iter_mut().for_each(|v| *v *= scale);
        kw.col_mut(j).iter_mut().for_each(|v| *v *= scale);
    }
    Ok(HarmonicRitz {
        space: RecycleSpace::from_image(w, kw)?,
        values,
    })
}
