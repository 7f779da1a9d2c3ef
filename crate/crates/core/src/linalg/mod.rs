//! Sparse storage and the small dense kernels shared by all solvers.

pub mod angles;
pub mod dense;
pub mod flops;
pub mod givens;
pub mod mmio;
pub mod qr;
pub mod schur;
pub mod sparse;
pub mod svd;
pub mod symeig;
#[cfg(test)]
pub(crate) mod testutil;

pub use angles::principal_angles;
pub use dense::{axpy, dot, norm, DenseMatrix};
pub use givens::GivensRotation;
pub use qr::{orthonormal_range, thin_qr, ThinQr};
pub use schur::{real_schur_ordered, OrderedSchur, SchurOrdering};
pub use sparse::{invert_permutation, SparseSymMatrix, SymOperator};
pub use svd::{thin_svd, ThinSvd};
pub use symeig::{sym_eig, SymEig};
