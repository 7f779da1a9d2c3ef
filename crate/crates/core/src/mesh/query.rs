//! Point location, P1 evaluation and nearest-point projection.

use super::adapt::{signed_area, AdaptedMesh};
use super::geometry::{closest_on_segment, dist, Point};
use crate::{Error, Result};

/// Barycentric tolerance for closed-triangle containment.
pub const BARY_TOL: f64 = 1e-12;

impl AdaptedMesh {
    pub fn active_count(&self) -> usize {
        self.active_nodes.len()
    }

    pub fn element_points(&self, e: usize) -> [Point; 3] {
        self.grid.element_nodes(e).map(|n| self.positions[n])
    }

    pub fn element_area(&self, e: usize) -> f64 {
        signed_area(self.element_points(e))
    }

    pub fn active_area(&self) -> f64 {
        self.active_elements.iter().map(|&e| self.element_area(e)).sum()
    }

    fn barycentric(&self, e: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.element_points(e);
        let area = signed_area([a, b, c]);
        let l1 = signed_area([p, b, c]) / area;
        let l2 = signed_area([a, p, c]) / area;
        [l1, l2, 1.0 - l1 - l2]
    }

    /// Lowest-id active element whose closed triangle contains `p`.
    pub fn locate_point(&self, p: Point) -> Option<usize> {
        self.locate_with_weights(p).map(|(e, _)| e)
    }

    /// Containing element and barycentric weights of `p`.
    pub fn locate_with_weights(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let g = &self.grid;
        let bb = g.bbox;
        let margin = g.h();
        if p[0] < bb[0] - margin || p[0] > bb[2] + margin || p[1] < bb[1] - margin || p[1] > bb[3] + margin {
            return None;
        }
        let (cx, cy) = g.cell_of(p);
        let mut best: Option<(usize, [f64; 3])> = None;
        let (x0, x1) = (cx.saturating_sub(2), (cx + 2).min(g.nx - 2));
        let (y0, y1) = (cy.saturating_sub(2), (cy + 2).min(g.ny - 2));
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let c = iy * (g.nx - 1) + ix;
                for e in [2 * c, 2 * c + 1] {
                    if !self.element_active[e] || best.is_some_and(|(b, _)| b < e) {
                        continue;
                    }
                    let w = self.barycentric(e, p);
                    if w.iter().all(|&x| x >= -BARY_TOL) {
                        best = Some((e, w));
                    }
                }
            }
        }
        best
    }

    /// Barycentric interpolation of active-node coefficients at `p`.
    pub fn evaluate_p1(&self, coeffs: &[f64], p: Point) -> Result<f64> {
        self.evaluate_p1_strided(coeffs, 1, 0, p)
    }

    /// Like [`evaluate_p1`](Self::evaluate_p1) for dof-interleaved vectors:
    /// node `i` reads `coeffs[stride * i + offset]`.
    pub fn evaluate_p1_strided(&self, coeffs: &[f64], stride: usize, offset: usize, p: Point) -> Result<f64> {
        if coeffs.len() != stride * self.active_count() {
            return Err(Error::DimensionMismatch {
                expected: stride * self.active_count(),
                got: coeffs.len(),
            });
        }
        let (e, w) = self.locate_with_weights(p).ok_or(Error::OutsideMesh(p[0], p[1]))?;
        let v = self.grid.element_nodes(e);
        let mut s = 0.0;
        for l in 0..3 {
            let row = self.active_index[v[l]].expect("active element with inactive vertex");
            s += w[l] * coeffs[stride * row + offset];
        }
        Ok(s)
    }

    /// `p` itself if it lies in the active mesh, otherwise the nearest point
    /// on the boundary of the active mesh (ties: lowest boundary-edge index).
    pub fn nearest_point_projection(&self, p: Point) -> Result<Point> {
        if self.boundary_edges.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if self.locate_point(p).is_some() {
            return Ok(p);
        }
        let mut best = (f64::INFINITY, p);
        for be in &self.boundary_edges {
            let q = closest_on_segment(p, self.positions[be.nodes[0]], self.positions[be.nodes[1]]);
            let d = dist(p, q);
            if d < best.0 {
                best = (d, q);
            }
        }
        Ok(best.1)
    }

    /// Text export: node and element lists for visualization.
    pub fn export_text<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "nodes {}", self.active_count())?;
        for (row, &id) in self.active_nodes.iter().enumerate() {
            let p = self.positions[id];
            let s = match self.status[id] {
                super::NodeStatus::InteriorActive => "interior",
                super::NodeStatus::BoundaryActive => "boundary",
                super::NodeStatus::Inactive => "inactive",
            };
            writeln!(out, "{row} {id} {:.17e} {:.17e} {s}", p[0], p[1])?;
        }
        writeln!(out, "elements {}", self.active_elements.len())?;
        for &e in &self.active_elements {
            let v = self.grid.element_nodes(e).map(|n| self.active_index[n].unwrap_or(usize::MAX));
            writeln!(out, "{e} {} {} {}", v[0], v[1], v[2])?;
        }
        Ok(())
    }
}
