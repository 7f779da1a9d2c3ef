//! Incomplete Cholesky preconditioning, bandwidth-reducing orderings and the
//! symmetric split-preconditioned operator handed to the solvers.

mod ic;
mod operator;
mod rcm;

pub use ic::{factorize, ic0, ict, FactorKind, ICFactor, MAX_SHIFT_RETRIES};
pub use operator::PrecondOperator;
pub use rcm::{bfs_levels, rcm, rcm_order};

use crate::linalg::SparseSymMatrix;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Preconditioner choice as used by the drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PrecondConfig {
    /// `None` runs unpreconditioned.
    pub kind: Option<FactorKind>,
    pub rcm: bool,
}

/// RCM computed on the node graph and expanded to interleaved dofs, so the
/// components of each node stay adjacent.
pub fn rcm_nodes(k: &SparseSymMatrix, dofs_per_node: usize) -> Vec<usize> {
    if dofs_per_node <= 1 {
        return rcm(k);
    }
    let nodes = k.n() / dofs_per_node;
    let mut adj = vec![Vec::new(); nodes];
    for (i, row) in k.adjacency().iter().enumerate() {
        let a = i / dofs_per_node;
        adj[a].extend(row.iter().map(|&j| j / dofs_per_node).filter(|&b| b != a));
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let order = rcm_order(&adj);
    let perm: Vec<usize> = order
        .iter()
        .flat_map(|&v| (0..dofs_per_node).map(move |c| v * dofs_per_node + c))
        .collect();
    let permuted = k.permute(&perm).expect("node ordering expands to a permutation");
    if permuted.bandwidth() <= k.bandwidth() {
        perm
    } else {
        (0..k.n()).collect()
    }
}

/// Builds the operator for `k` according to `cfg`.
pub fn build_operator(k: &SparseSymMatrix, dofs_per_node: usize, cfg: &PrecondConfig) -> Result<PrecondOperator> {
    match cfg.kind {
        None => Ok(PrecondOperator::unpreconditioned(k.clone())),
        Some(kind) => {
            let perm = cfg.rcm.then(|| rcm_nodes(k, dofs_per_node));
            let f = factorize(k, kind, perm.as_deref())?;
            PrecondOperator::new(k.clone(), Some(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testutil::random_block;
    use crate::linalg::{dot, norm, DenseMatrix, SymOperator};

    fn random_spd(n: usize, seed: u64) -> SparseSymMatrix {
        let a = random_block(n, n, seed);
        let mut s = a.tr_matmul(&a).add(&DenseMatrix::identity(n));
        s.symmetrize();
        SparseSymMatrix::from_dense(&s).unwrap()
    }

    fn vecs(n: usize) -> (Vec<f64>, Vec<f64>) {
        let x = (0..n).map(|i| ((i * 7 + 1) as f64).sin()).collect();
        let y = (0..n).map(|i| ((i * 3 + 2) as f64).cos()).collect();
        (x, y)
    }

    #[test]
    fn no_factor_is_spmv() {
        let k = random_spd(20, 1);
        let op = PrecondOperator::new(k.clone(), None).unwrap();
        let (x, _) = vecs(20);
        assert_eq!(op.apply_vec(&x), k.spmv(&x).unwrap());
    }

    #[test]
    fn exact_factor_gives_identity() {
        let k = random_spd(30, 2);
        let f = ict(&k, 0.0).unwrap();
        let op = PrecondOperator::new(k, Some(f)).unwrap();
        let (x, _) = vecs(30);
        let y = op.apply_vec(&x);
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        assert!(norm(&d) <= 1e-10 * norm(&x));
    }

    #[test]
    fn split_operator_is_symmetric() {
        let k = random_spd(40, 3);
        let f = ic0(&k).unwrap();
        let op = PrecondOperator::new(k, Some(f)).unwrap();
        let (x, y) = vecs(40);
        let a = dot(&y, &op.apply_vec(&x));
        let b = dot(&x, &op.apply_vec(&y));
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
    }

    #[test]
    fn coordinate_changes_are_inverse_with_permutation() {
        let k = random_spd(25, 4);
        let perm: Vec<usize> = (0..25).map(|i| (i * 7) % 25).collect();
        let f = factorize(&k, FactorKind::Ic0, Some(&perm)).unwrap();
        let op = PrecondOperator::new(k.clone(), Some(f)).unwrap();
        let (x, _) = vecs(25);
        let back = op.to_nodal(&op.to_precond(&x));
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
        // Solving in preconditioned coordinates and mapping back solves K u = f:
        // op(w) = rhs(K x) for w = to_precond(x).
        let lhs = op.apply_vec(&op.to_precond(&x));
        let rhs = op.rhs(&k.spmv(&x).unwrap());
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-10 * norm(&rhs));
        }
    }

    #[test]
    fn node_rcm_keeps_dof_pairs_together() {
        // Two dofs per node on a 6-node path, labels scrambled.
        let label = [3usize, 0, 5, 1, 4, 2];
        let mut t = Vec::new();
        for v in 0..6 {
            for c in 0..2 {
                t.push((2 * v + c, 2 * v + c, 4.0));
            }
            t.push((2 * v, 2 * v + 1, 0.5));
            t.push((2 * v + 1, 2 * v, 0.5));
        }
        for w in label.windows(2) {
            for c in 0..2 {
                for d in 0..2 {
                    t.push((2 * w[0] + c, 2 * w[1] + d, -1.0));
                    t.push((2 * w[1] + d, 2 * w[0] + c, -1.0));
                }
            }
        }
        let k = SparseSymMatrix::from_triplets(12, &t).unwrap();
        let p = rcm_nodes(&k, 2);
        for pair in p.chunks(2) {
            assert_eq!(pair[0] % 2, 0);
            assert_eq!(pair[1], pair[0] + 1);
        }
        assert_eq!(k.permute(&p).unwrap().bandwidth(), 3);
    }
}
