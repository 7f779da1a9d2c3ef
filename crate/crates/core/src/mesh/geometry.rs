//! Closed polyline curves and the domain they bound.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// Closed polyline. The closing segment from the last point back to the
/// first is implicit. `tags` holds either one tag for the whole curve or one
/// per segment; an empty list means tag 0 everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<Point>,
    #[serde(default)]
    pub tags: Vec<u32>,
}

impl Curve {
    pub fn new(mut points: Vec<Point>, tags: Vec<u32>) -> Result<Self> {
        if points.len() >= 2 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 3 {
            return Err(Error::InvalidGeometry(
                "a closed curve needs at least three points".into(),
            ));
        }
        if !(tags.is_empty() || tags.len() == 1 || tags.len() == points.len()) {
            return Err(Error::InvalidGeometry(format!(
                "{} tags for {} segments",
                tags.len(),
                points.len()
            )));
        }
        Ok(Curve { points, tags })
    }

    /// Polygon approximation of a circle, first vertex at angle `phase`.
    pub fn circle(center: Point, radius: f64, segments: usize, phase: f64, tag: u32) -> Self {
        Self::ellipse(center, radius, radius, segments, phase, tag)
    }

    pub fn ellipse(center: Point, a: f64, b: f64, segments: usize, phase: f64, tag: u32) -> Self {
        let points = (0..segments)
            .map(|i| {
                let t = phase + 2.0 * std::f64::consts::PI * i as f64 / segments as f64;
                [center[0] + a * t.cos(), center[1] + b * t.sin()]
            })
            .collect();
        Curve {
            points,
            tags: vec![tag],
        }
    }

    pub fn segment_count(&self) -> usize {
        self.points.len()
    }

    pub fn segment(&self, s: usize) -> (Point, Point) {
        let n = self.points.len();
        (self.points[s], self.points[(s + 1) % n])
    }

    pub fn tag(&self, s: usize) -> u32 {
        match self.tags.len() {
            0 => 0,
            1 => self.tags[0],
            _ => self.tags[s],
        }
    }

    pub fn translated(&self, d: Point) -> Self {
        Curve {
            points: self.points.iter().map(|p| [p[0] + d[0], p[1] + d[1]]).collect(),
            tags: self.tags.clone(),
        }
    }

    /// Vertices whose turning angle exceeds `min_angle` radians.
    pub fn corners(&self, min_angle: f64) -> Vec<Point> {
        let n = self.points.len();
        (0..n)
            .filter(|&i| {
                let p = self.points[(i + n - 1) % n];
                let c = self.points[i];
                let q = self.points[(i + 1) % n];
                let u = [c[0] - p[0], c[1] - p[1]];
                let v = [q[0] - c[0], q[1] - c[1]];
                let cross = u[0] * v[1] - u[1] * v[0];
                let dot = u[0] * v[0] + u[1] * v[1];
                cross.atan2(dot).abs() > min_angle
            })
            .map(|i| self.points[i])
            .collect()
    }
}

/// A segment of some curve in a geometry, flattened for fast iteration.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub tag: u32,
}

/// Domain bounded by an outer curve with holes removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub outer: Curve,
    #[serde(default)]
    pub holes: Vec<Curve>,
}

impl Geometry {
    pub fn new(outer: Curve, holes: Vec<Curve>) -> Self {
        Geometry { outer, holes }
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for c in self.curves() {
            for s in 0..c.segment_count() {
                let (a, b) = c.segment(s);
                out.push(Segment { a, b, tag: c.tag(s) });
            }
        }
        out
    }

    pub fn bounding_box(&self) -> [f64; 4] {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for c in self.curves() {
            for p in &c.points {
                bb[0] = bb[0].min(p[0]);
                bb[1] = bb[1].min(p[1]);
                bb[2] = bb[2].max(p[0]);
                bb[3] = bb[3].max(p[1]);
            }
        }
        bb
    }

    /// Even-odd ray casting towards +x over all curves. Vertices on the ray
    /// are resolved by the half-open rule (a vertex counts as lying just
    /// above the ray), which is the same as a deterministic upward
    /// perturbation of the ray.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for c in self.curves() {
            for s in 0..c.segment_count() {
                let (a, b) = c.segment(s);
                if (a[1] > p[1]) != (b[1] > p[1]) {
                    let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                    if x > p[0] {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    /// Distance to the nearest boundary segment, with that segment's tag and
    /// the closest point. Ties keep the first segment in curve order.
    pub fn nearest_boundary(&self, p: Point) -> (f64, u32, Point) {
        let mut best = (f64::INFINITY, 0, p);
        for c in self.curves() {
            for s in 0..c.segment_count() {
                let (a, b) = c.segment(s);
                let q = closest_on_segment(p, a, b);
                let d = dist(p, q);
                if d < best.0 {
                    best = (d, c.tag(s), q);
                }
            }
        }
        best
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn closest_on_segment(p: Point, a: Point, b: Point) -> Point {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return a;
    }
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    [a[0] + t * d[0], a[1] + t * d[1]]
}

/// Intersection of segments `p0p1` and `ab`, returned as the parameter
/// along `p0p1` and the point. Parallel segments report no intersection.
pub fn segment_intersection(p0: Point, p1: Point, a: Point, b: Point) -> Option<(f64, Point)> {
    let r = [p1[0] - p0[0], p1[1] - p0[1]];
    let s = [b[0] - a[0], b[1] - a[1]];
    let denom = r[0] * s[1] - r[1] * s[0];
    if denom == 0.0 {
        return None;
    }
    let q = [a[0] - p0[0], a[1] - p0[1]];
    let t = (q[0] * s[1] - q[1] * s[0]) / denom;
    let u = (q[0] * r[1] - q[1] * r[0]) / denom;
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&u) {
        return None;
    }
    Some((t, [p0[0] + t * r[0], p0[1] + t * r[1]]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Curve {
        Curve::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![]).unwrap()
    }

    #[test]
    fn containment_with_hole() {
        let hole = Curve::circle([0.5, 0.5], 0.2, 32, 0.0, 1);
        let g = Geometry::new(unit_square(), vec![hole]);
        assert!(g.contains([0.1, 0.1]));
        assert!(!g.contains([0.5, 0.5]));
        assert!(!g.contains([1.5, 0.5]));
    }

    #[test]
    fn ray_through_vertex_counts_once() {
        let diamond = Curve::new(vec![[1.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0]], vec![]).unwrap();
        let g = Geometry::new(diamond, vec![]);
        // The ray from (0.5, 1) passes exactly through the vertex (2, 1).
        assert!(g.contains([0.5, 1.0]));
        assert!(!g.contains([-0.5, 1.0]));
    }

    #[test]
    fn corners_of_square_and_none_on_circle() {
        assert_eq!(unit_square().corners(std::f64::consts::FRAC_PI_4).len(), 4);
        let c = Curve::circle([0.0, 0.0], 1.0, 40, 0.0, 0);
        assert!(c.corners(std::f64::consts::FRAC_PI_4).is_empty());
    }

    #[test]
    fn intersection_parameter() {
        let (t, p) = segment_intersection([0.0, 0.0], [0.0, 1.0], [-1.0, 0.4], [1.0, 0.4]).unwrap();
        assert!((t - 0.4).abs() < 1e-15);
        assert!((p[1] - 0.4).abs() < 1e-15);
        assert!(segment_intersection([0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]).is_none());
    }

    #[test]
    fn tag_count_is_validated() {
        assert!(Curve::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![1, 2]).is_err());
    }
}
