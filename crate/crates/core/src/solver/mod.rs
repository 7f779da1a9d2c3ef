//! MINRES and recycling MINRES on symmetric operators, with a harmonic-Ritz
//! recycle-space update computed from the small projected matrices.

mod recycle;
mod rminres;
mod update;

pub use recycle::{project_initial_guess, RecycleSpace};
pub use rminres::{minres, rminres, LanczosRecord, ResidualReference, Solution, SolveOptions, SolveReport};
