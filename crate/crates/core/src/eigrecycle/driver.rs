use super::cycle::{ks_cycle, KsConfig};
use super::decomposition::initialize;
use crate::linalg::{flops, DenseMatrix, SymOperator};
use crate::Result;
use std::io::Write;

/// Result of [`warmstart_krylov_schur`].
#[derive(Debug, Clone)]
pub struct KsOutcome {
    /// Orthonormal basis of the final decomposition: the retained Schur
    /// vectors followed by the Krylov direction.
    pub u: DenseMatrix,
    /// The `k` (or `k+1`) leading Schur vectors of the last stage.
    pub ritz_block: DenseMatrix,
    /// The Krylov direction `u_{m+1}` (last column of `u`).
    pub krylov_vector: Vec<f64>,
    pub cycles_used: usize,
    /// Per-vector residual norms of `ritz_block` after each stage; index 0
    /// is the initialization.
    pub residual_norms: Vec<Vec<f64>>,
    /// `‖R‖_F` of the decomposition after each stage.
    pub residual_frobenius: Vec<f64>,
    /// Ritz values `(re, im)` of each stage in Schur order.
    pub ritz_values: Vec<Vec<(f64, f64)>>,
    pub converged: bool,
    pub matvecs: usize,
    pub flops_init: u64,
    pub flops_cycles: Vec<u64>,
}

impl KsOutcome {
    /// One line per stage and vector: `cycle,vector,residual,ritz_re,ritz_im`.
    pub fn write_csv(&self, mut f: impl Write) -> Result<()> {
        writeln!(f, "cycle,vector,residual,ritz_re,ritz_im")?;
        for (c, (res, ritz)) in self.residual_norms.iter().zip(&self.ritz_values).enumerate() {
            for (j, r) in res.iter().enumerate() {
                let (re, im) = ritz.get(j).copied().unwrap_or((f64::NAN, f64::NAN));
                writeln!(f, "{c},{j},{r:e},{re:e},{im:e}")?;
            }
        }
        Ok(())
    }
}

fn max_abs_ritz(ritz: &[(f64, f64)]) -> f64 {
    ritz.iter().map(|&(re, im)| re.hypot(im)).fold(0.0, f64::max)
}

/// Improves the invariance of `range(W)` by up to `cfg.cycles` warm-start
/// Krylov-Schur cycles. Stops early once every retained Schur vector has
/// residual `≤ conv_tol · max|θ|` (at the start: every Ritz vector of
/// `range(W)`).
pub fn warmstart_krylov_schur(op: &impl SymOperator, w: &DenseMatrix, cfg: &KsConfig) -> Result<KsOutcome> {
    cfg.validate(op.dim())?;
    let (init, flops_init) = flops::measure(|| initialize(op, w, cfg.ordering, cfg.lazy_first_basis));
    let (mut d, info) = init?;
    let mut knorm = max_abs_ritz(&info.ritz);
    let mut out = KsOutcome {
        u: d.u().into_owned(),
        ritz_block: DenseMatrix::zeros(w.rows(), 0),
        krylov_vector: Vec::new(),
        cycles_used: 0,
        residual_frobenius: vec![d.residual_norm()],
        residual_norms: vec![info.residual_norms],
        ritz_values: vec![info.ritz],
        converged: false,
        matvecs: info.matvecs,
        flops_init,
        flops_cycles: Vec::new(),
    };
    let converged = |res: &[f64], knorm: f64| res.iter().all(|&r| r <= cfg.conv_tol * knorm);
    out.converged = converged(&out.residual_norms[0], knorm);
    out.ritz_block = out.u.clone();
    while !out.converged && out.cycles_used < cfg.cycles {
        let (step, f) = flops::measure(|| ks_cycle(op, &d, cfg));
        let (next, ci) = step?;
        out.flops_cycles.push(f);
        out.matvecs += ci.matvecs;
        out.cycles_used += 1;
        knorm = knorm.max(max_abs_ritz(&ci.ritz));
        out.converged = converged(&ci.residual_norms[..ci.retained.max(1)], knorm);
        out.residual_frobenius.push(next.residual_norm());
        out.residual_norms.push(ci.residual_norms);
        out.ritz_values.push(ci.ritz);
        out.ritz_block = ci.block;
        out.u = next.u().into_owned();
        d = next;
    }
    out.krylov_vector = out.u.col(out.u.cols() - 1).to_vec();
    Ok(out)
}

impl KsOutcome {
    /// `[ritz_block, u_{m+1}]`: the leading Schur vectors together with the
    /// Krylov direction.
    pub fn extended_block(&self) -> DenseMatrix {
        let mut b = self.ritz_block.clone();
        if self.cycles_used > 0 {
            b.push_col(&self.krylov_vector);
        }
        b
    }
}

/// Predicted dense work of the initialization and of one cycle, in flops,
/// and the operator applications per cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopPrediction {
    pub init: f64,
    pub cycle: f64,
    pub cycle_matvecs: usize,
}

/// `8nk²` for the initialization and `2n(m² − k² + 2mk)` per cycle.
pub fn predicted_flops(k: usize, m: usize, n: usize) -> FlopPrediction {
    let (k, m, nf) = (k as f64, m as f64, n as f64);
    FlopPrediction {
        init: 8.0 * nf * k * k,
        cycle: 2.0 * nf * (m * m - k * k + 2.0 * m * k),
        cycle_matvecs: (m - k) as usize + 1,
    }
}

/// Prediction for a configuration applied to an operator of dimension `n`.
pub fn flop_audit(cfg: &KsConfig, n: usize) -> FlopPrediction {
    predicted_flops(cfg.k, cfg.m, n)
}
