//! Warm-start Krylov-Schur: turns an approximately invariant subspace into
//! a Krylov decomposition and improves it with restarted Arnoldi cycles.

mod cycle;
mod decomposition;
mod driver;

pub use cycle::{ks_cycle, CycleInfo, KsConfig};
pub use decomposition::{min_backward_error_decomposition, InitInfo, KrylovDecomposition};
pub use driver::{flop_audit, predicted_flops, warmstart_krylov_schur, FlopPrediction, KsOutcome};

/// Minimum-backward-error decomposition with its diagnostics.
pub fn initialize_decomposition(
    op: &impl crate::linalg::SymOperator,
    w: &crate::linalg::DenseMatrix,
    cfg: &KsConfig,
) -> crate::Result<(KrylovDecomposition, InitInfo)> {
    decomposition::initialize(op, w, cfg.ordering, cfg.lazy_first_basis)
}
