use crate::linalg::DenseMatrix;
use crate::precond::ICFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateChange {
    /// `x = Pᵀ L⁻ᵀ w`.
    PrecondToNodal,
    /// `w = Lᵀ P x`.
    NodalToPrecond,
}

/// Applies the coordinate change of a split preconditioner column by
/// column. Without a factor both directions are the identity.
pub fn change_precond_coordinates(w: &DenseMatrix, factor: Option<&ICFactor>, direction: CoordinateChange) -> DenseMatrix {
    let Some(f) = factor else {
        return w.clone();
    };
    let mut out = DenseMatrix::zeros(w.rows(), 0);
    for col in w.columns() {
        let v = match direction {
            CoordinateChange::PrecondToNodal => {
                let mut t = col.to_vec();
                f.solve_upper(&mut t);
                f.unpermute(&t)
            }
            CoordinateChange::NodalToPrecond => {
                let mut t = f.permute(col);
                f.mul_upper(&mut t);
                t
            }
        };
        out.push_col(&v);
    }
    out
}
