use crate::linalg::{mmio, SparseSymMatrix};
use crate::mesh::AdaptedMesh;
use crate::Result;
use std::io::Write;

/// Linear system over the active dofs of one mesh.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub k: SparseSymMatrix,
    pub f: Vec<f64>,
    /// 1 for scalar problems, 2 for plane elasticity (node-major interleaving).
    pub dofs_per_node: usize,
    /// Active row to background node id.
    pub nodes: Vec<usize>,
    /// Prescribed value per dof; such rows are identity rows in `k`.
    pub dirichlet: Vec<Option<f64>>,
}

impl AssembledSystem {
    pub fn n(&self) -> usize {
        self.k.n()
    }

    pub fn dof(&self, active_row: usize, component: usize) -> usize {
        self.dofs_per_node * active_row + component
    }

    pub fn write_matrix_market<W: Write>(&self, out: W) -> Result<()> {
        mmio::write_matrix_market(&self.k, out)
    }

    pub fn write_rhs<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.f {
            writeln!(out, "{v:.17e}")?;
        }
        Ok(())
    }
}

/// Entry-wise accumulation in a fixed order. Element matrices are visited
/// in ascending element order and each off-diagonal value is pushed to both
/// `(i, j)` and `(j, i)`, so the result is bit-exactly symmetric.
pub(crate) struct Assembler {
    pub n: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    pub f: Vec<f64>,
}

impl Assembler {
    pub fn new(n: usize) -> Self {
        Assembler {
            n,
            triplets: Vec::new(),
            f: vec![0.0; n],
        }
    }

    /// Add a symmetric element matrix given by its upper triangle
    /// (`ke[a][b]` read for `a <= b`).
    pub fn add_element<const M: usize>(&mut self, dofs: &[usize; M], ke: &[[f64; M]; M]) {
        for a in 0..M {
            for b in a..M {
                let v = ke[a][b];
                self.triplets.push((dofs[a], dofs[b], v));
                if a != b {
                    self.triplets.push((dofs[b], dofs[a], v));
                }
            }
        }
    }

    /// Symmetric elimination of prescribed dofs: their rows and columns are
    /// replaced by identity rows and the known values move to the right-hand
    /// side.
    pub fn finish(
        self,
        dirichlet: Vec<Option<f64>>,
        dofs_per_node: usize,
        mesh: &AdaptedMesh,
    ) -> Result<AssembledSystem> {
        let full = SparseSymMatrix::from_triplets(self.n, &self.triplets)?;
        let mut f = self.f;
        let mut triplets = Vec::with_capacity(full.nnz());
        for i in 0..self.n {
            if let Some(g) = dirichlet[i] {
                triplets.push((i, i, 1.0));
                f[i] = g;
                continue;
            }
            let (cols, vals) = full.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                match dirichlet[j] {
                    Some(g) => f[i] -= v * g,
                    None => triplets.push((i, j, v)),
                }
            }
        }
        let mut k = SparseSymMatrix::from_triplets(self.n, &triplets)?;
        k.verify_symmetry()?;
        Ok(AssembledSystem {
            k,
            f,
            dofs_per_node,
            nodes: mesh.active_nodes.clone(),
            dirichlet,
        })
    }

    /// Matrix before elimination, for kernel checks.
    pub fn unconstrained(self) -> Result<(SparseSymMatrix, Vec<f64>)> {
        Ok((SparseSymMatrix::from_triplets(self.n, &self.triplets)?, self.f))
    }
}
