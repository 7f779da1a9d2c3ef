use super::poisson::p1_gradients;
use super::system::{AssembledSystem, Assembler};
use crate::linalg::SparseSymMatrix;
use crate::mesh::AdaptedMesh;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ElasticBc {
    Free,
    /// Surface traction (force per area); integrated over edge length times
    /// thickness.
    Traction { tx: f64, ty: f64 },
    Clamped,
    /// Affine displacement `u = a + M x`: `ux = ax + mxx x + mxy y`,
    /// `uy = ay + myx x + myy y`.
    Prescribed { a: [f64; 2], m: [[f64; 2]; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityProblem {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub thickness: f64,
    pub boundary: BTreeMap<u32, ElasticBc>,
}

impl ElasticityProblem {
    /// Plane-stress constitutive matrix.
    pub fn constitutive(&self) -> [[f64; 3]; 3] {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        let s = e / (1.0 - nu * nu);
        [[s, s * nu, 0.0], [s * nu, s, 0.0], [0.0, 0.0, s * (1.0 - nu) / 2.0]]
    }

    fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0 && self.thickness > 0.0) {
            return Err(Error::InvalidProblem("material constants must be positive".into()));
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) && self.poisson_ratio != 0.0 {
            return Err(Error::InvalidProblem("Poisson ratio must lie in [0, 0.5)".into()));
        }
        Ok(())
    }
}

fn collect(mesh: &AdaptedMesh, prob: &ElasticityProblem) -> Result<(Assembler, Vec<Option<f64>>)> {
    prob.validate()?;
    let n = 2 * mesh.active_count();
    let mut asm = Assembler::new(n);
    let row = |node: usize| mesh.active_index[node].expect("active element with inactive vertex");
    let d = prob.constitutive();

    for &e in &mesh.active_elements {
        let v = mesh.grid.element_nodes(e);
        let (b, c, area) = p1_gradients(mesh.element_points(e));
        if area <= 0.0 {
            return Err(Error::ZeroAreaElement(e));
        }
        // Strain-displacement matrix, 3 x 6.
        let inv = 1.0 / (2.0 * area);
        let mut bm = [[0.0; 6]; 3];
        for i in 0..3 {
            bm[0][2 * i] = b[i] * inv;
            bm[1][2 * i + 1] = c[i] * inv;
            bm[2][2 * i] = c[i] * inv;
            bm[2][2 * i + 1] = b[i] * inv;
        }
        let mut db = [[0.0; 6]; 3];
        for r in 0..3 {
            for col in 0..6 {
                db[r][col] = (0..3).map(|k| d[r][k] * bm[k][col]).sum();
            }
        }
        let scale = prob.thickness * area;
        let mut ke = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in i..6 {
                ke[i][j] = scale * (0..3).map(|k| bm[k][i] * db[k][j]).sum::<f64>();
            }
        }
        let r = v.map(row);
        let dofs = [2 * r[0], 2 * r[0] + 1, 2 * r[1], 2 * r[1] + 1, 2 * r[2], 2 * r[2] + 1];
        asm.add_element(&dofs, &ke);
    }

    let mut dirichlet = vec![None; n];
    for (idx, be) in mesh.boundary_edges.iter().enumerate() {
        let bc = prob.boundary.get(&be.tag).ok_or_else(|| Error::UntaggedBoundary {
            edge: idx,
            tag: be.tag.to_string(),
        })?;
        let r = be.nodes.map(row);
        let (pa, pb) = (mesh.positions[be.nodes[0]], mesh.positions[be.nodes[1]]);
        let len = crate::mesh::dist(pa, pb);
        match *bc {
            ElasticBc::Free => {}
            ElasticBc::Traction { tx, ty } => {
                let w = prob.thickness * len / 2.0;
                for &ri in &r {
                    asm.f[2 * ri] += tx * w;
                    asm.f[2 * ri + 1] += ty * w;
                }
            }
            ElasticBc::Clamped => {
                for &ri in &r {
                    dirichlet[2 * ri] = Some(0.0);
                    dirichlet[2 * ri + 1] = Some(0.0);
                }
            }
            ElasticBc::Prescribed { a, m } => {
                for (&ri, p) in r.iter().zip([pa, pb]) {
                    dirichlet[2 * ri] = Some(a[0] + m[0][0] * p[0] + m[0][1] * p[1]);
                    dirichlet[2 * ri + 1] = Some(a[1] + m[1][0] * p[0] + m[1][1] * p[1]);
                }
            }
        }
    }
    Ok((asm, dirichlet))
}

pub fn assemble_elasticity(mesh: &AdaptedMesh, prob: &ElasticityProblem) -> Result<AssembledSystem> {
    let (asm, dirichlet) = collect(mesh, prob)?;
    if dirichlet.iter().all(Option::is_none) {
        return Err(Error::NoClampedDofs);
    }
    asm.finish(dirichlet, 2, mesh)
}

/// Stiffness and load before elimination of prescribed dofs.
pub fn assemble_elasticity_unconstrained(
    mesh: &AdaptedMesh,
    prob: &ElasticityProblem,
) -> Result<(SparseSymMatrix, Vec<f64>)> {
    collect(mesh, prob)?.0.unconstrained()
}
