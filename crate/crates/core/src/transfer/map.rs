use super::correspondence::{NodeClass, NodeCorrespondence, TransferReport};
use crate::linalg::{norm, DenseMatrix};
use crate::mesh::{dist, AdaptedMesh, Point};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferOptions {
    /// Recompute nodes that keep their status but were snapped to a
    /// different position. Off gives the plain three-case rule, where only
    /// status changes trigger recomputation.
    pub recompute_moved: bool,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self { recompute_moved: true }
    }
}

fn check_rows(w: &DenseMatrix, mesh: &AdaptedMesh, dofs_per_node: usize) -> Result<()> {
    if dofs_per_node == 0 {
        return Err(Error::InvalidConfig("dofs_per_node must be positive".into()));
    }
    if mesh.active_count() == 0 {
        return Err(Error::EmptyMesh);
    }
    let expected = dofs_per_node * mesh.active_count();
    if w.rows() != expected {
        return Err(Error::DimensionMismatch { expected, got: w.rows() });
    }
    Ok(())
}

/// Old-mesh active rows and P1 weights at the projection of `p` onto the
/// old active mesh.
fn stencil(old: &AdaptedMesh, p: Point) -> Result<[(usize, f64); 3]> {
    let q = old.nearest_point_projection(p)?;
    let (e, wts) = old.locate_with_weights(q).ok_or(Error::OutsideMesh(q[0], q[1]))?;
    let v = old.grid.element_nodes(e);
    let row = |l: usize| old.active_index[v[l]].expect("active element with inactive vertex");
    // Nodal interpolation is exact at a vertex.
    if let Some(l) = (0..3).find(|&l| old.positions[v[l]] == q) {
        return Ok([(row(l), 1.0), (row(l), 0.0), (row(l), 0.0)]);
    }
    Ok([(row(0), wts[0]), (row(1), wts[1]), (row(2), wts[2])])
}

fn fill_row(w: &DenseMatrix, out: &mut DenseMatrix, dofs: usize, dst: usize, terms: &[(usize, f64)]) {
    for j in 0..w.cols() {
        let src = w.col(j);
        let col = out.col_mut(j);
        for c in 0..dofs {
            col[dofs * dst + c] = terms.iter().map(|&(r, a)| a * src[dofs * r + c]).sum();
        }
    }
}

fn column_norm_ratio(w: &DenseMatrix, wt: &DenseMatrix) -> Vec<f64> {
    (0..w.cols())
        .map(|j| {
            let a = norm(w.col(j));
            if a > 0.0 {
                norm(wt.col(j)) / a
            } else {
                0.0
            }
        })
        .collect()
}

/// Distance-weighted mean over previously active neighbors: weight
/// `(Σ_m d_m − d_s) / ((|S| − 1) Σ_m d_m)`, distances from the neighbors'
/// old positions to the node's new position. The weights sum to one.
pub fn extrapolation_weights(old_positions: &[Point], p: Point) -> Vec<f64> {
    let d: Vec<f64> = old_positions.iter().map(|&s| dist(s, p)).collect();
    match d.len() {
        0 => Vec::new(),
        1 => vec![1.0],
        k => {
            let total: f64 = d.iter().sum();
            if total == 0.0 {
                return vec![1.0 / k as f64; k];
            }
            d.iter().map(|&ds| (total - ds) / ((k - 1) as f64 * total)).collect()
        }
    }
}

/// Maps `W` (rows over the active dofs of `old`) to the active dofs of
/// `new` by node correspondence on the shared background grid: unchanged
/// nodes copy their value, nodes whose status changed (and, with
/// `recompute_moved`, nodes that moved) are interpolated on the old mesh at
/// the projection of their new position, and newly active nodes take the
/// distance-weighted mean of their previously active neighbors. Rows are
/// dof-interleaved with `dofs_per_node` components, each mapped separately.
pub fn map_subspace_structured(
    w: &DenseMatrix,
    old: &AdaptedMesh,
    new: &AdaptedMesh,
    dofs_per_node: usize,
    opts: &TransferOptions,
) -> Result<(DenseMatrix, TransferReport)> {
    check_rows(w, old, dofs_per_node)?;
    if w.cols() == 0 {
        return Err(Error::InvalidConfig("empty subspace".into()));
    }
    let corr = NodeCorrespondence::classify(old, new)?;
    let mut report = TransferReport::from_correspondence(&corr);
    let dofs = dofs_per_node;
    let mut out = DenseMatrix::zeros(dofs * new.active_count(), w.cols());
    for (dst, &id) in new.active_nodes.iter().enumerate() {
        let class = corr.classes[id].expect("active node without class");
        let recompute = match class {
            NodeClass::Stable => false,
            NodeClass::Moved => opts.recompute_moved,
            NodeClass::StatusChanged => true,
            NodeClass::NewlyActive => {
                let s: Vec<usize> = new.grid.neighbors(id).into_iter().filter(|&s| old.status[s].is_active()).collect();
                let pos: Vec<Point> = s.iter().map(|&s| old.positions[s]).collect();
                let wts = extrapolation_weights(&pos, new.positions[id]);
                let terms: Vec<(usize, f64)> = s
                    .iter()
                    .zip(&wts)
                    .map(|(&s, &a)| (old.active_index[s].expect("active node without row"), a))
                    .collect();
                match s.len() {
                    0 => report.zero_filled.push(id),
                    1 => report.single_neighbor.push(id),
                    _ => report.extrapolated.push(id),
                }
                fill_row(w, &mut out, dofs, dst, &terms);
                continue;
            }
            NodeClass::NewlyInactive => unreachable!("inactive node in the new active set"),
        };
        if recompute {
            report.recomputed += 1;
            let terms = stencil(old, new.positions[id])?;
            fill_row(w, &mut out, dofs, dst, &terms);
        } else {
            let src = old.active_index[id].expect("active node without row");
            fill_row(w, &mut out, dofs, dst, &[(src, 1.0)]);
        }
    }
    report.column_norm_ratio = column_norm_ratio(w, &out);
    Ok((out, report))
}

/// Finite-element interpolation: every active node of `new` is projected
/// onto the active region of `old` (nearest point, identity inside) and
/// each column is evaluated there. The meshes need not share a grid.
pub fn map_subspace_generic(w: &DenseMatrix, old: &AdaptedMesh, new: &AdaptedMesh, dofs_per_node: usize) -> Result<DenseMatrix> {
    check_rows(w, old, dofs_per_node)?;
    let mut out = DenseMatrix::zeros(dofs_per_node * new.active_count(), w.cols());
    for (dst, &id) in new.active_nodes.iter().enumerate() {
        let terms = stencil(old, new.positions[id])?;
        fill_row(w, &mut out, dofs_per_node, dst, &terms);
    }
    Ok(out)
}
