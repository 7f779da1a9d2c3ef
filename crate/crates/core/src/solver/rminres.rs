use super::recycle::RecycleSpace;
use super::update::{harmonic_update, SearchSpace};
use crate::linalg::dense::scale;
use crate::linalg::{axpy, dot, flops, norm, DenseMatrix, GivensRotation, SymOperator};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which initial residual the stopping test `|ỹ_{j+1}| ≤ tol · ‖r_0‖` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualReference {
    /// `‖f − K ũ_0‖` before the recycle-space correction.
    #[default]
    Unprojected,
    /// `‖(I − C Cᵀ)(f − K ũ_0)‖`.
    Projected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub tol: f64,
    pub maxit: usize,
    pub reference: ResidualReference,
    /// Lanczos vectors retained for the recycle-space update before the
    /// search space is compressed.
    pub window: usize,
    /// Dimension kept by a compression; defaults to `2 · k_next`.
    pub compress_to: Option<usize>,
    /// Re-orthogonalize every new Lanczos vector against `C` and all
    /// retained Lanczos vectors.
    pub full_reorth: bool,
    /// Record the true residual every this many iterations.
    pub sample_every: Option<usize>,
    /// Return the Lanczos basis and projected matrices.
    pub keep_lanczos: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            maxit: 1000,
            reference: ResidualReference::Unprojected,
            window: 400,
            compress_to: None,
            full_reorth: false,
            sample_every: None,
            keep_lanczos: false,
        }
    }
}

impl SolveOptions {
    pub fn new(tol: f64, maxit: usize) -> Self {
        Self {
            tol,
            maxit,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Entry 0 is `‖r_0‖` after the recycle correction; entry `j` is the
    /// Givens estimate `|ỹ_{j+1}|` of `‖r_j‖`.
    pub residual_history: Vec<f64>,
    /// `‖f − K ũ_0‖`.
    pub initial_residual: f64,
    /// Norm the tolerance is relative to.
    pub reference_residual: f64,
    pub true_final_residual: f64,
    /// `(iteration, ‖f − K u_j‖)` when sampling is enabled.
    pub sampled_residuals: Vec<(usize, f64)>,
    /// Operator applications inside the solve (excluding the final check).
    pub matvecs: usize,
    /// Vector and small dense flops; operator applications are not included.
    pub flops_estimate: u64,
    pub wall_time: f64,
    pub converged: bool,
    pub breakdown: bool,
    /// Local Lanczos orthogonality lost beyond 1e-6 (operator not symmetric).
    pub orthogonality_warning: bool,
    pub c_reorthogonalizations: usize,
    pub compressions: usize,
    /// The recycle-space update failed and the input space was kept.
    pub recycle_fallback: bool,
    pub recycle_dim: usize,
    pub harmonic_ritz_values: Vec<f64>,
}

impl SolveReport {
    /// `true_final_residual ≤ 1.1 · last estimate + 1e-12`.
    pub fn agreement(&self) -> bool {
        let last = self.residual_history.last().copied().unwrap_or(0.0);
        self.true_final_residual <= 1.1 * last + 1e-12
    }

    /// CSV with columns `iteration,estimated_residual,true_residual`; the last
    /// column is empty where no true residual was sampled.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,estimated_residual,true_residual")?;
        let mut sampled = self.sampled_residuals.iter().peekable();
        for (j, est) in self.residual_history.iter().enumerate() {
            write!(out, "{j},{est:.6e},")?;
            if let Some(&&(i, t)) = sampled.peek() {
                if i == j {
                    write!(out, "{t:.6e}")?;
                    sampled.next();
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Lanczos quantities of a solve: `K V_j = C B_j + V_{j+1} T̲_j`.
#[derive(Debug, Clone)]
pub struct LanczosRecord {
    pub v: DenseMatrix,
    pub b: DenseMatrix,
    pub tbar: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: Vec<f64>,
    pub recycle: RecycleSpace,
    pub report: SolveReport,
    /// Present when `keep_lanczos` was set and no compression happened.
    pub lanczos: Option<LanczosRecord>,
}

/// Plain MINRES: recycling MINRES with an empty recycle space.
pub fn minres(op: &impl SymOperator, f: &[f64], u0: Option<&[f64]>, opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let s = solve(op, f, u0, &RecycleSpace::empty(op.dim()), opts, 0)?;
    Ok((s.u, s.report))
}

/// Recycling MINRES with recycle space `rs` (which must satisfy
/// `K W = C R` for this operator). Returns the solution and a recycle space
/// of dimension `k_next` for the next system.
pub fn rminres(
    op: &impl SymOperator,
    f: &[f64],
    u0: Option<&[f64]>,
    rs: &RecycleSpace,
    opts: &SolveOptions,
    k_next: usize,
) -> Result<Solution> {
    solve(op, f, u0, rs, opts, k_next)
}

/// Search-space data kept for the recycle-space update.
struct Retention {
    zfixed: DenseMatrix,
    yfixed: DenseMatrix,
    vs: Vec<Vec<f64>>,
    lead: usize,
    alpha: Vec<f64>,
    beta_in: Vec<f64>,
    beta_out: Vec<f64>,
    b: DenseMatrix,
}

impl Retention {
    fn new(rs: &RecycleSpace) -> Self {
        Self {
            zfixed: rs.w().clone(),
            yfixed: rs.c().matmul(rs.r()),
            vs: Vec::new(),
            lead: 0,
            alpha: Vec::new(),
            beta_in: Vec::new(),
            beta_out: Vec::new(),
            b: DenseMatrix::zeros(rs.k(), 0),
        }
    }

    fn m(&self) -> usize {
        self.alpha.len()
    }

    fn tbar(&self) -> DenseMatrix {
        let p = self.vs.len();
        let mut t = DenseMatrix::zeros(p, self.m());
        for l in 0..self.m() {
            let row = self.lead + l;
            if row >= 1 && self.beta_in[l] != 0.0 {
                t[(row - 1, l)] = self.beta_in[l];
            }
            t[(row, l)] = self.alpha[l];
            if row + 1 < p {
                t[(row + 1, l)] = self.beta_out[l];
            }
        }
        t
    }

    fn update(&self, c: &DenseMatrix, k_next: usize) -> Result<super::update::HarmonicRitz> {
        let tbar = self.tbar();
        harmonic_update(
            &SearchSpace {
                zfixed: &self.zfixed,
                yfixed: &self.yfixed,
                c,
                vs: &self.vs,
                lead: self.lead,
                m: self.m(),
                tbar: &tbar,
                b: &self.b,
            },
            k_next,
        )
    }

    /// Replaces the search space by its best `dim` harmonic Ritz vectors and
    /// keeps only the last two Lanczos vectors.
    fn compress(&mut self, c: &DenseMatrix, dim: usize) -> Result<()> {
        let hr = self.update(c, dim)?;
        self.yfixed = hr.space.c().matmul(hr.space.r());
        self.zfixed = hr.space.w().clone();
        let keep = self.vs.len().saturating_sub(2);
        self.vs.drain(..keep);
        self.lead = self.vs.len() - 1;
        self.alpha.clear();
        self.beta_in.clear();
        self.beta_out.clear();
        self.b = DenseMatrix::zeros(c.cols(), 0);
        Ok(())
    }

    fn record(&self) -> LanczosRecord {
        LanczosRecord {
            v: DenseMatrix::from_columns(self.zfixed.rows(), &self.vs).expect("equal lengths"),
            b: self.b.clone(),
            tbar: self.tbar(),
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn residual(op: &impl SymOperator, f: &[f64], u: &[f64]) -> Vec<f64> {
    let ku = op.apply_vec(u);
    f.iter().zip(&ku).map(|(a, b)| a - b).collect()
}

fn solve(
    op: &impl SymOperator,
    f: &[f64],
    u0: Option<&[f64]>,
    rs: &RecycleSpace,
    opts: &SolveOptions,
    k_next: usize,
) -> Result<Solution> {
    let n = op.dim();
    check_len(n, f.len())?;
    if let Some(u0) = u0 {
        check_len(n, u0.len())?;
    }
    if rs.k() > 0 {
        check_len(n, rs.n())?;
    }
    let clock = Instant::now();
    let flops0 = flops::current();
    let k = rs.k();
    let mut report = SolveReport::default();

    let (mut u, mut r) = match u0 {
        Some(u0) if u0.iter().any(|&x| x != 0.0) => {
            report.matvecs += 1;
            (u0.to_vec(), residual(op, f, u0))
        }
        _ => (vec![0.0; n], f.to_vec()),
    };
    report.initial_residual = norm(&r);
    let coef0 = rs.project_out(&mut r);
    let mut bhat = rs.solve_r(&coef0);
    let beta1 = norm(&r);
    report.reference_residual = match opts.reference {
        ResidualReference::Unprojected => report.initial_residual,
        ResidualReference::Projected => beta1,
    };
    let target = opts.tol * report.reference_residual;
    report.residual_history.push(beta1);

    let retain = k_next > 0 || opts.keep_lanczos;
    let mut ret = Retention::new(rs);
    let compress_to = opts.compress_to.unwrap_or(2 * k_next).max(k_next);

    let mut v_prev = vec![0.0; n];
    let mut v = r;
    if beta1 > 0.0 {
        scale(1.0 / beta1, &mut v);
        if retain {
            ret.vs.push(v.clone());
        }
    }
    let mut beta = 0.0;
    let mut g2 = GivensRotation::identity(0);
    let mut g1 = GivensRotation::identity(0);
    let mut ybar = beta1;
    let mut vt1 = vec![0.0; n];
    let mut vt2 = vec![0.0; n];
    let mut bt1 = vec![0.0; k];
    let mut bt2 = vec![0.0; k];
    let mut converged = beta1 <= target;
    let mut j = 0;

    while !converged && j < opts.maxit {
        j += 1;
        let mut vh = op.apply_vec(&v);
        report.matvecs += 1;
        axpy(-beta, &v_prev, &mut vh);
        let alpha = dot(&v, &vh);
        axpy(-alpha, &v, &mut vh);
        // Projecting against C last keeps C-components of earlier vectors
        // from propagating through the three-term recurrence.
        let mut coef = rs.project_out(&mut vh);
        let mut beta_next = norm(&vh);
        let kv_norm = (coef.iter().map(|c| c * c).sum::<f64>() + beta * beta + alpha * alpha + beta_next * beta_next).sqrt();
        // Cancellation in the three-term step leaves relative C-components of
        // about eps · ‖K v‖ / t_{j+1,j}.
        if k > 0 && (opts.full_reorth || beta_next * 1e-8 < f64::EPSILON * kv_norm) {
            let extra = rs.project_out(&mut vh);
            coef.iter_mut().zip(&extra).for_each(|(a, e)| *a += e);
            report.c_reorthogonalizations += 1;
            beta_next = norm(&vh);
        }
        if opts.full_reorth {
            for w in &ret.vs {
                let a = dot(w, &vh);
                axpy(-a, w, &mut vh);
            }
            beta_next = norm(&vh);
        }
        let breakdown = beta_next <= f64::EPSILON * kv_norm;
        if breakdown {
            beta_next = 0.0;
            report.breakdown = true;
        } else if j >= 2 {
            let o: f64 = v_prev.iter().zip(&vh).map(|(a, b)| a * b).sum::<f64>() / beta_next;
            if o.abs() > 1e-6 {
                report.orthogonality_warning = true;
            }
        }

        // QR of the new column of T̲ by the previous two rotations and a new one.
        let (s_jm2, r1) = g2.apply(0.0, beta);
        let (s_jm1, d) = g1.apply(r1, alpha);
        let (g, s_jj) = GivensRotation::annihilate(d, beta_next, j);
        if s_jj == 0.0 {
            // Singular projected operator (inconsistent system).
            break;
        }
        let (yj, ynext) = g.apply(ybar, 0.0);

        let mut vt = v.clone();
        axpy(-s_jm1, &vt1, &mut vt);
        axpy(-s_jm2, &vt2, &mut vt);
        scale(1.0 / s_jj, &mut vt);
        axpy(yj, &vt, &mut u);
        if k > 0 {
            let bj = rs.solve_r(&coef);
            let bt: Vec<f64> = (0..k).map(|i| (bj[i] - bt1[i] * s_jm1 - bt2[i] * s_jm2) / s_jj).collect();
            flops::add(6 * k);
            axpy(-yj, &bt, &mut bhat);
            bt2 = std::mem::replace(&mut bt1, bt);
        }
        ybar = ynext;
        report.residual_history.push(ynext.abs());
        vt2 = std::mem::replace(&mut vt1, vt);
        g2 = g1;
        g1 = g;

        if retain {
            ret.alpha.push(alpha);
            ret.beta_in.push(beta);
            ret.beta_out.push(beta_next);
            ret.b.push_col(&coef);
        }
        if !breakdown {
            scale(1.0 / beta_next, &mut vh);
            if retain {
                ret.vs.push(vh.clone());
            }
        }
        v_prev = std::mem::replace(&mut v, vh);
        beta = beta_next;

        if let Some(every) = opts.sample_every {
            if every > 0 && j % every == 0 {
                let mut full = u.clone();
                for (i, &b) in bhat.iter().enumerate() {
                    axpy(b, rs.w().col(i), &mut full);
                }
                report.sampled_residuals.push((j, norm(&residual(op, f, &full))));
            }
        }
        converged = ynext.abs() <= target || breakdown;
        if retain && !converged && k_next > 0 && ret.m() >= opts.window && compress_to < ret.zfixed.cols() + ret.m() {
            ret.compress(rs.c(), compress_to)?;
            report.compressions += 1;
        }
    }

    for (i, &b) in bhat.iter().enumerate() {
        axpy(b, rs.w().col(i), &mut u);
    }
    report.iterations = j;
    report.converged = converged;
    report.true_final_residual = norm(&residual(op, f, &u));

    let recycle = if k_next == 0 {
        RecycleSpace::empty(n)
    } else {
        match ret.update(rs.c(), k_next) {
            Ok(hr) => {
                report.harmonic_ritz_values = hr.values;
                hr.space
            }
            Err(_) => {
                report.recycle_fallback = true;
                rs.clone()
            }
        }
    };
    report.recycle_dim = k;
    report.flops_estimate = flops::current() - flops0;
    report.wall_time = clock.elapsed().as_secs_f64();
    let lanczos = (opts.keep_lanczos && report.compressions == 0).then(|| ret.record());
    Ok(Solution {
        u,
        recycle,
        report,
        lanczos,
    })
}
