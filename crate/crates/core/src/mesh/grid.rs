//! Structured background triangulation.

use super::geometry::Point;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Regular grid of `nx × ny` nodes numbered row-major from the lower-left
/// corner. Cell `(ix, iy)` is split along its lower-left to upper-right
/// diagonal into element `2c` (below the diagonal) and `2c + 1` (above),
/// where `c = iy (nx - 1) + ix`. Both triangles are counter-clockwise.
///
/// Edges are numbered by visiting nodes in order and emitting, for each
/// node, the edge to its right neighbor, to its upper neighbor and to its
/// upper-right neighbor (whichever exist). The first endpoint of every edge
/// is the lower node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundGrid {
    /// `[xmin, ymin, xmax, ymax]`.
    pub bbox: [f64; 4],
    pub nx: usize,
    pub ny: usize,
}

impl BackgroundGrid {
    pub fn new(bbox: [f64; 4], nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::GridTooSmall { nx, ny });
        }
        if !(bbox[2] > bbox[0] && bbox[3] > bbox[1]) || bbox.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateBox);
        }
        Ok(BackgroundGrid { bbox, nx, ny })
    }

    pub fn hx(&self) -> f64 {
        (self.bbox[2] - self.bbox[0]) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.bbox[3] - self.bbox[1]) / (self.ny - 1) as f64
    }

    /// Cell diagonal length.
    pub fn h(&self) -> f64 {
        self.hx().hypot(self.hy())
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn element_count(&self) -> usize {
        2 * (self.nx - 1) * (self.ny - 1)
    }

    pub fn node(&self, id: usize) -> Point {
        let (ix, iy) = (id % self.nx, id / self.nx);
        [
            self.bbox[0] + ix as f64 * self.hx(),
            self.bbox[1] + iy as f64 * self.hy(),
        ]
    }

    pub fn node_id(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn element_nodes(&self, e: usize) -> [usize; 3] {
        let c = e / 2;
        let (ix, iy) = (c % (self.nx - 1), c / (self.nx - 1));
        let n00 = self.node_id(ix, iy);
        let n10 = n00 + 1;
        let n01 = n00 + self.nx;
        let n11 = n01 + 1;
        if e % 2 == 0 {
            [n00, n10, n11]
        } else {
            [n00, n11, n01]
        }
    }

    /// Cell containing `p` (clamped to the grid).
    pub fn cell_of(&self, p: Point) -> (usize, usize) {
        let fx = ((p[0] - self.bbox[0]) / self.hx()).floor();
        let fy = ((p[1] - self.bbox[1]) / self.hy()).floor();
        let ix = fx.clamp(0.0, (self.nx - 2) as f64) as usize;
        let iy = fy.clamp(0.0, (self.ny - 2) as f64) as usize;
        (ix, iy)
    }

    /// All edges `(lower id, higher id)` in edge-id order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(3 * self.node_count());
        for id in 0..self.node_count() {
            let (ix, iy) = (id % self.nx, id / self.nx);
            let right = ix + 1 < self.nx;
            let up = iy + 1 < self.ny;
            if right {
                out.push((id, id + 1));
            }
            if up {
                out.push((id, id + self.nx));
            }
            if right && up {
                out.push((id, id + self.nx + 1));
            }
        }
        out
    }

    /// Id of the first edge emitted by each node, followed by the total
    /// edge count.
    pub(crate) fn edge_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.node_count() + 1);
        let mut count = 0;
        for id in 0..self.node_count() {
            offsets.push(count);
            let (ix, iy) = (id % self.nx, id / self.nx);
            let right = ix + 1 < self.nx;
            let up = iy + 1 < self.ny;
            count += right as usize + up as usize + (right && up) as usize;
        }
        offsets.push(count);
        offsets
    }

    /// Nodes sharing an element with `id`, ascending.
    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let (ix, iy) = ((id % self.nx) as isize, (id / self.nx) as isize);
        let mut out = Vec::with_capacity(6);
        for (dx, dy) in [(-1, -1), (0, -1), (-1, 0), (1, 0), (0, 1), (1, 1)] {
            let (x, y) = (ix + dx, iy + dy);
            if x >= 0 && y >= 0 && (x as usize) < self.nx && (y as usize) < self.ny {
                out.push(self.node_id(x as usize, y as usize));
            }
        }
        out.sort_unstable();
        out
    }

    /// Elements touching node `id`.
    pub fn node_elements(&self, id: usize) -> Vec<usize> {
        let (ix, iy) = (id % self.nx, id / self.nx);
        let mut out = Vec::with_capacity(6);
        for (cx, cy) in [(ix.wrapping_sub(1), iy.wrapping_sub(1)), (ix, iy.wrapping_sub(1)), (ix.wrapping_sub(1), iy), (ix, iy)] {
            if cx < self.nx - 1 && cy < self.ny - 1 {
                let c = cy * (self.nx - 1) + cx;
                for e in [2 * c, 2 * c + 1] {
                    if self.element_nodes(e).contains(&id) {
                        out.push(e);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid() {
        let g = BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 2, 2).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.element_count(), 2);
        assert_eq!(g.element_nodes(0), [0, 1, 3]);
        assert_eq!(g.element_nodes(1), [0, 3, 2]);
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]);
    }

    #[test]
    fn sizes_at_experiment_scale() {
        let g = BackgroundGrid::new([0.0, 0.0, 2.0, 1.0], 361, 181).unwrap();
        assert_eq!(g.node_count(), 65341);
        let g = BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 101, 101).unwrap();
        assert_eq!(g.node_count(), 10201);
        assert_eq!(g.element_count(), 20000);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(BackgroundGrid::new([0.0, 0.0, 0.0, 1.0], 3, 3).is_err());
        assert!(BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 1, 3).is_err());
    }

    #[test]
    fn elements_are_counter_clockwise() {
        let g = BackgroundGrid::new([0.0, 0.0, 2.0, 1.0], 5, 4).unwrap();
        for e in 0..g.element_count() {
            let [a, b, c] = g.element_nodes(e).map(|i| g.node(i));
            let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            assert!(area > 0.0);
        }
    }

    #[test]
    fn neighbor_relation_matches_elements() {
        let g = BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 4, 3).unwrap();
        for id in 0..g.node_count() {
            let mut from_elems: Vec<usize> = g
                .node_elements(id)
                .iter()
                .flat_map(|&e| g.element_nodes(e))
                .filter(|&n| n != id)
                .collect();
            from_elems.sort_unstable();
            from_elems.dedup();
            assert_eq!(from_elems, g.neighbors(id));
        }
        let offsets = g.edge_offsets();
        assert_eq!(*offsets.last().unwrap(), g.edges().len());
    }
}
