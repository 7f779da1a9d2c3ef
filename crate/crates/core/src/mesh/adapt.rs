//! Boundary snapping and extraction of the active submesh.

use super::geometry::{dist, segment_intersection, Geometry, Point, Segment};
use super::grid::BackgroundGrid;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    InteriorActive,
    BoundaryActive,
    Inactive,
}

impl NodeStatus {
    pub fn is_active(self) -> bool {
        self != NodeStatus::Inactive
    }
}

/// Edge of exactly one active element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    /// Background node ids in the element's counter-clockwise order.
    pub nodes: [usize; 2],
    pub element: usize,
    pub tag: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptOptions {
    /// Curve vertices turning by more than this angle (radians) pull their
    /// nearest grid node onto themselves before edge snapping.
    pub corner_angle: f64,
    /// On-curve tolerance relative to the cell diagonal.
    pub relative_tol: f64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            corner_angle: std::f64::consts::FRAC_PI_4,
            relative_tol: 1e-10,
        }
    }
}

/// Background grid adapted to a geometry.
#[derive(Debug, Clone)]
pub struct AdaptedMesh {
    pub grid: BackgroundGrid,
    pub positions: Vec<Point>,
    /// Node was relocated (nonzero displacement).
    pub moved: Vec<bool>,
    /// Node lies on a geometry curve (snapped there or already on it).
    pub on_curve: Vec<bool>,
    pub status: Vec<NodeStatus>,
    /// Active element ids, ascending.
    pub active_elements: Vec<usize>,
    pub element_active: Vec<bool>,
    /// Background node id to active row, ascending in background id.
    pub active_index: Vec<Option<usize>>,
    /// Active row to background node id.
    pub active_nodes: Vec<usize>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub tol: f64,
}

/// Spatial hash of curve segments over grid cells; every segment is listed
/// in each cell its bounding box (grown by one cell) touches.
pub(crate) struct SegmentBuckets {
    nx: usize,
    cells: Vec<Vec<usize>>,
}

impl SegmentBuckets {
    pub(crate) fn new(grid: &BackgroundGrid, segs: &[Segment]) -> Self {
        let (cx, cy) = (grid.nx - 1, grid.ny - 1);
        let mut cells = vec![Vec::new(); cx * cy];
        for (i, s) in segs.iter().enumerate() {
            let (x0, y0, x1, y1) = cell_window(grid, s.a, s.b);
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    cells[iy * cx + ix].push(i);
                }
            }
        }
        SegmentBuckets { nx: cx, cells }
    }

    pub(crate) fn near(&self, grid: &BackgroundGrid, p: Point) -> &[usize] {
        let (ix, iy) = grid.cell_of(p);
        &self.cells[iy * self.nx + ix]
    }
}

fn cell_window(grid: &BackgroundGrid, a: Point, b: Point) -> (usize, usize, usize, usize) {
    let lo = grid.cell_of([a[0].min(b[0]), a[1].min(b[1])]);
    let hi = grid.cell_of([a[0].max(b[0]), a[1].max(b[1])]);
    (
        lo.0.saturating_sub(1),
        lo.1.saturating_sub(1),
        (hi.0 + 1).min(grid.nx - 2),
        (hi.1 + 1).min(grid.ny - 2),
    )
}

fn point_segment_distance(p: Point, s: &Segment) -> f64 {
    dist(p, super::geometry::closest_on_segment(p, s.a, s.b))
}

pub fn adapt_to_boundary(grid: &BackgroundGrid, geom: &Geometry) -> Result<AdaptedMesh> {
    adapt_with_options(grid, geom, AdaptOptions::default())
}

pub fn adapt_with_options(grid: &BackgroundGrid, geom: &Geometry, opts: AdaptOptions) -> Result<AdaptedMesh> {
    let tol = opts.relative_tol * grid.h();
    let bb = geom.bounding_box();
    if bb[0] < grid.bbox[0] - tol
        || bb[1] < grid.bbox[1] - tol
        || bb[2] > grid.bbox[2] + tol
        || bb[3] > grid.bbox[3] + tol
    {
        return Err(Error::InvalidGeometry(
            "geometry extends beyond the background grid".into(),
        ));
    }
    let segs = geom.segments();
    let buckets = SegmentBuckets::new(grid, &segs);
    let nn = grid.node_count();
    let original: Vec<Point> = (0..nn).map(|i| grid.node(i)).collect();
    let mut positions = original.clone();
    let mut on_curve = vec![false; nn];
    let mut moved = vec![false; nn];

    // Sharp corners first: the nearest grid node is pulled onto the corner.
    for curve in geom.curves() {
        for c in curve.corners(opts.corner_angle) {
            let ix = ((c[0] - grid.bbox[0]) / grid.hx()).round() as usize;
            let iy = ((c[1] - grid.bbox[1]) / grid.hy()).round() as usize;
            let id = grid.node_id(ix.min(grid.nx - 1), iy.min(grid.ny - 1));
            if !on_curve[id] {
                on_curve[id] = true;
                moved[id] = positions[id] != c;
                positions[id] = c;
            }
        }
    }

    // Nodes already lying on a curve.
    for s in &segs {
        let (x0, y0, x1, y1) = cell_window(grid, s.a, s.b);
        for iy in y0..=(y1 + 1) {
            for ix in x0..=(x1 + 1) {
                let id = grid.node_id(ix, iy);
                if !on_curve[id] && point_segment_distance(original[id], s) <= tol {
                    on_curve[id] = true;
                }
            }
        }
    }

    // Edge crossings, collected per segment over nearby edges.
    let edges = grid.edges();
    let offsets = grid.edge_offsets();
    let mut crossings: Vec<(usize, f64, Point)> = Vec::new();
    for s in &segs {
        let (x0, y0, x1, y1) = cell_window(grid, s.a, s.b);
        for iy in y0..=(y1 + 1) {
            for ix in x0..=(x1 + 1) {
                let id = grid.node_id(ix, iy);
                for eid in offsets[id]..offsets[id + 1] {
                    let (a, b) = edges[eid];
                    if let Some((t, p)) = segment_intersection(original[a], original[b], s.a, s.b) {
                        if dist(p, original[a]) <= tol || dist(p, original[b]) <= tol {
                            continue;
                        }
                        crossings.push((eid, t, p));
                    }
                }
            }
        }
    }
    crossings.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    crossings.dedup_by(|x, y| x.0 == y.0 && dist(x.2, y.2) <= tol);

    // Conflicts are judged against the state before edge snapping so that
    // the outcome does not depend on which cut edge was visited first.
    let fixed_before = on_curve.clone();
    let mut i = 0;
    while i < crossings.len() {
        let eid = crossings[i].0;
        let mut j = i;
        while j < crossings.len() && crossings[j].0 == eid {
            j += 1;
        }
        let group = &crossings[i..j];
        let (a, b) = edges[eid];
        // Nearer endpoint per crossing; an exact midpoint goes to the lower id.
        let to_a: Vec<&(usize, f64, Point)> = group.iter().filter(|c| c.1 <= 0.5).collect();
        let to_b: Vec<&(usize, f64, Point)> = group.iter().filter(|c| c.1 > 0.5).collect();
        if !to_a.is_empty() && !to_b.is_empty() && !fixed_before[a] && !fixed_before[b] {
            return Err(Error::Resolution(format!(
                "edge {eid} ({a}, {b}) is cut near both endpoints; geometry feature below grid resolution"
            )));
        }
        if let Some(c) = to_a.first() {
            if !on_curve[a] {
                positions[a] = c.2;
                moved[a] = true;
                on_curve[a] = true;
            }
        }
        if let Some(c) = to_b.last() {
            if !on_curve[b] {
                positions[b] = c.2;
                moved[b] = true;
                on_curve[b] = true;
            }
        }
        i = j;
    }

    let near_curve = |p: Point| -> bool {
        buckets
            .near(grid, p)
            .iter()
            .any(|&s| point_segment_distance(p, &segs[s]) <= tol)
    };

    let mut status: Vec<NodeStatus> = (0..nn)
        .map(|id| {
            if on_curve[id] {
                NodeStatus::BoundaryActive
            } else if geom.contains(positions[id]) {
                NodeStatus::InteriorActive
            } else {
                NodeStatus::Inactive
            }
        })
        .collect();

    let ne = grid.element_count();
    let mut element_active = vec![false; ne];
    let mut active_elements = Vec::new();
    let min_area = 1e-12 * grid.hx() * grid.hy();
    for (e, flag) in element_active.iter_mut().enumerate() {
        let v = grid.element_nodes(e);
        if v.iter().any(|&n| status[n] == NodeStatus::Inactive) {
            continue;
        }
        let p = v.map(|n| positions[n]);
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        if !geom.contains(c) || near_curve(c) {
            continue;
        }
        let area = signed_area(p);
        if area <= min_area {
            return Err(Error::Resolution(format!(
                "active element {e} is degenerate or inverted (area {area:e})"
            )));
        }
        *flag = true;
        active_elements.push(e);
    }

    let mut in_element = vec![false; nn];
    for &e in &active_elements {
        for n in grid.element_nodes(e) {
            in_element[n] = true;
        }
    }
    for id in 0..nn {
        if !in_element[id] {
            status[id] = NodeStatus::Inactive;
        }
    }
    let mut active_index = vec![None; nn];
    let mut active_nodes = Vec::new();
    for id in 0..nn {
        if status[id].is_active() {
            active_index[id] = Some(active_nodes.len());
            active_nodes.push(id);
        }
    }
    if active_nodes.is_empty() {
        return Err(Error::EmptyMesh);
    }

    let boundary_edges = find_boundary_edges(grid, &active_elements, &positions, geom);

    Ok(AdaptedMesh {
        grid: grid.clone(),
        positions,
        moved,
        on_curve,
        status,
        active_elements,
        element_active,
        active_index,
        active_nodes,
        boundary_edges,
        tol,
    })
}

pub(crate) fn signed_area(p: [Point; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}

fn find_boundary_edges(
    grid: &BackgroundGrid,
    active: &[usize],
    positions: &[Point],
    geom: &Geometry,
) -> Vec<BoundaryEdge> {
    use std::collections::HashMap;
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for &e in active {
        let v = grid.element_nodes(e);
        for l in 0..3 {
            let (a, b) = (v[l], v[(l + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut out = Vec::new();
    for &e in active {
        let v = grid.element_nodes(e);
        for l in 0..3 {
            let (a, b) = (v[l], v[(l + 1) % 3]);
            if count[&(a.min(b), a.max(b))] == 1 {
                let (pa, pb) = (positions[a], positions[b]);
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                let (_, tag, _) = geom.nearest_boundary(mid);
                out.push(BoundaryEdge {
                    nodes: [a, b],
                    element: e,
                    tag,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::geometry::Curve;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Curve {
        Curve::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]], vec![]).unwrap()
    }

    #[test]
    fn whole_box_moves_nothing() {
        let grid = BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 6, 6).unwrap();
        let m = adapt_to_boundary(&grid, &Geometry::new(rect(0.0, 0.0, 1.0, 1.0), vec![])).unwrap();
        assert!(m.moved.iter().all(|&x| !x));
        assert_eq!(m.active_nodes.len(), 36);
        assert_eq!(m.active_elements.len(), 50);
        assert_eq!(m.boundary_edges.len(), 20);
    }

    #[test]
    fn nearest_vertex_moves_onto_crossing() {
        // Horizontal boundary at y = 0.4 cuts the vertical unit edges 0.4
        // above their lower endpoints.
        let grid = BackgroundGrid::new([0.0, 0.0, 4.0, 4.0], 5, 5).unwrap();
        let g = Geometry::new(rect(0.0, 0.0, 4.0, 2.4), vec![]);
        let m = adapt_to_boundary(&grid, &g).unwrap();
        let id = grid.node_id(2, 2);
        assert!(m.moved[id]);
        assert!((m.positions[id][1] - 2.4).abs() < 1e-15);
        assert_eq!(m.positions[id][0], 2.0);
        assert_eq!(m.status[id], NodeStatus::BoundaryActive);
        assert_eq!(m.status[grid.node_id(2, 3)], NodeStatus::Inactive);
    }

    #[test]
    fn deterministic_rerun() {
        let grid = BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 31, 31).unwrap();
        let hole = Curve::circle([0.52, 0.47], 0.2, 64, 0.1, 1);
        let g = Geometry::new(rect(0.0, 0.0, 1.0, 1.0), vec![hole]);
        let a = adapt_to_boundary(&grid, &g).unwrap();
        let b = adapt_to_boundary(&grid, &g).unwrap();
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.active_elements, b.active_elements);
    }

    #[test]
    fn thin_feature_is_a_resolution_error() {
        let grid = BackgroundGrid::new([0.0, 0.0, 1.0, 1.0], 11, 11).unwrap();
        // A sliver 0.02 wide straddles one column of vertical edges.
        let g = Geometry::new(rect(0.1, 0.43, 0.9, 0.47), vec![]);
        let g = Geometry::new(rect(0.0, 0.0, 1.0, 1.0), vec![g.outer]);
        assert!(matches!(adapt_to_boundary(&grid, &g), Err(Error::Resolution(_))));
    }
}
