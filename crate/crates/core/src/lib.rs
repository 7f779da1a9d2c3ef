//! Krylov subspace recycling for long sequences of sparse symmetric systems
//! assembled on evolving structured finite-element meshes.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: CSR storage, small dense factorizations, principal angles, Matrix Market IO.
//! - [`mesh`]: structured background grid, boundary snapping, P1 evaluation.
//! - [`fem`]: Poisson and plane-stress elasticity assembly on active meshes.
//! - [`precond`]: RCM, IC(0), ICT and the split-preconditioned operator.
//! - [`solver`]: MINRES and recycling MINRES with harmonic-Ritz recycle updates.
//! - [`eigrecycle`]: warm-start Krylov-Schur for repairing transferred subspaces.
//! - [`transfer`]: mesh-to-mesh mapping of subspace bases.

pub mod eigrecycle;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod precond;
pub mod solver;
pub mod transfer;

pub use error::{Error, Result};
