//! Principal angles between column spaces.

use super::dense::DenseMatrix;
use super::qr::orthonormal_range;
use super::svd::thin_svd;
use crate::{Error, Result};

/// Cosines of the principal angles between `range(A)` and `range(B)`,
/// nonincreasing and clipped to `[0, 1]`.
///
/// Rank-deficient inputs are reduced to their numerical range first. When
/// the two ranges differ in dimension, `min(dim)` cosines are returned.
pub fn principal_angles(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<f64>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.rows(),
        });
    }
    let (qa, _) = orthonormal_range(a);
    let (qb, _) = orthonormal_range(b);
    if qa.cols() == 0 || qb.cols() == 0 {
        return Ok(Vec::new());
    }
    // Thin SVD needs rows >= cols.
    let m = if qa.cols() >= qb.cols() {
        qa.tr_matmul(&qb)
    } else {
        qb.tr_matmul(&qa)
    };
    let svd = thin_svd(&m)?;
    Ok(svd.omega.iter().map(|&c| c.clamp(0.0, 1.0)).collect())
}
