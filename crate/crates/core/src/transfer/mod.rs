//! Mapping of subspace bases between the meshes of consecutive design
//! steps, and the coordinate changes of the split preconditioner.

mod coords;
mod correspondence;
mod map;

pub use coords::{change_precond_coordinates, CoordinateChange};
pub use correspondence::{NodeClass, NodeCorrespondence, TransferReport};
pub use map::{extrapolation_weights, map_subspace_generic, map_subspace_structured, TransferOptions};

use crate::linalg::{orthonormal_range, DenseMatrix};
use crate::mesh::AdaptedMesh;
use crate::precond::ICFactor;
use crate::Result;

/// Carries a recycle basis held in preconditioned coordinates of the old
/// step to preconditioned coordinates of the new step: back to nodal values,
/// structured mapping, forward with the new factor, then an orthonormal
/// basis of the range (dependent columns dropped).
pub fn transfer_recycle_basis(
    w: &DenseMatrix,
    old: &AdaptedMesh,
    new: &AdaptedMesh,
    old_factor: Option<&ICFactor>,
    new_factor: Option<&ICFactor>,
    dofs_per_node: usize,
    opts: &TransferOptions,
) -> Result<(DenseMatrix, TransferReport)> {
    let nodal = change_precond_coordinates(w, old_factor, CoordinateChange::PrecondToNodal);
    let (mapped, report) = map_subspace_structured(&nodal, old, new, dofs_per_node, opts)?;
    let precond = change_precond_coordinates(&mapped, new_factor, CoordinateChange::NodalToPrecond);
    Ok((orthonormal_range(&precond).0, report))
}
