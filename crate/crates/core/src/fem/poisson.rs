use super::system::{AssembledSystem, Assembler};
use crate::linalg::SparseSymMatrix;
use crate::mesh::AdaptedMesh;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PoissonBc {
    /// `κ ∂u/∂n + α (u - ambient) = 0`.
    Robin { alpha: f64, ambient: f64 },
    Dirichlet { value: f64 },
    Neumann { flux: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonProblem {
    pub conductivity: f64,
    /// Constant volume source.
    pub source: f64,
    /// Condition per boundary tag.
    pub boundary: BTreeMap<u32, PoissonBc>,
}

/// P1 gradient coefficients `(b, c)` and area: `∇φ_i = (b_i, c_i) / (2A)`.
pub(crate) fn p1_gradients(p: [[f64; 2]; 3]) -> ([f64; 3], [f64; 3], f64) {
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    let area = 0.5 * (b[0] * c[1] - b[1] * c[0]);
    (b, c, area)
}

fn collect(mesh: &AdaptedMesh, prob: &PoissonProblem) -> Result<(Assembler, Vec<Option<f64>>)> {
    let n = mesh.active_count();
    let mut asm = Assembler::new(n);
    let row = |node: usize| mesh.active_index[node].expect("active element with inactive vertex");

    for &e in &mesh.active_elements {
        let v = mesh.grid.element_nodes(e);
        let (b, c, area) = p1_gradients(mesh.element_points(e));
        if area <= 0.0 {
            return Err(Error::ZeroAreaElement(e));
        }
        let scale = prob.conductivity / (4.0 * area);
        let mut ke = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                ke[i][j] = scale * (b[i] * b[j] + c[i] * c[j]);
            }
        }
        let dofs = v.map(row);
        asm.add_element(&dofs, &ke);
        for &d in &dofs {
            asm.f[d] += prob.source * area / 3.0;
        }
    }

    let mut dirichlet = vec![None; n];
    for (idx, be) in mesh.boundary_edges.iter().enumerate() {
        let bc = prob.boundary.get(&be.tag).ok_or_else(|| Error::UntaggedBoundary {
            edge: idx,
            tag: be.tag.to_string(),
        })?;
        let dofs = be.nodes.map(row);
        let len = crate::mesh::dist(mesh.positions[be.nodes[0]], mesh.positions[be.nodes[1]]);
        match *bc {
            PoissonBc::Robin { alpha, ambient } => {
                let m = alpha * len / 6.0;
                asm.add_element(&dofs, &[[2.0 * m, m], [m, 2.0 * m]]);
                for &d in &dofs {
                    asm.f[d] += alpha * ambient * len / 2.0;
                }
            }
            PoissonBc::Neumann { flux } => {
                for &d in &dofs {
                    asm.f[d] += flux * len / 2.0;
                }
            }
            PoissonBc::Dirichlet { value } => {
                for &d in &dofs {
                    dirichlet[d] = Some(value);
                }
            }
        }
    }
    Ok((asm, dirichlet))
}

pub fn assemble_poisson(mesh: &AdaptedMesh, prob: &PoissonProblem) -> Result<AssembledSystem> {
    let (asm, dirichlet) = collect(mesh, prob)?;
    asm.finish(dirichlet, 1, mesh)
}

/// Stiffness (with Robin terms) and load before Dirichlet elimination.
pub fn assemble_poisson_unconstrained(mesh: &AdaptedMesh, prob: &PoissonProblem) -> Result<(SparseSymMatrix, Vec<f64>)> {
    collect(mesh, prob)?.0.unconstrained()
}
