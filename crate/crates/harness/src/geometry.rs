//! Geometry sequences of the three experiments. The outlines are stand-ins:
//! a stadium-shaped blade with elliptic caps, a circular-arc rod and a
//! square rotated by 30°.

use crate::config::{ExperimentConfig, Problem};
use anyhow::{bail, Result};
use krecycle::mesh::{BackgroundGrid, Curve, Geometry, Point};
use std::f64::consts::PI;

/// Boundary tags shared by the geometries and the problem definitions.
pub mod tags {
    pub const OUTER: u32 = 1;
    pub const HOLE: u32 = 2;
    pub const FREE: u32 = 0;
    pub const CLAMPED: u32 = 1;
    pub const LOADED: u32 = 2;
}

pub const HOLE_RADIUS: f64 = 0.12;
pub const HOLE_START: Point = [0.8, 0.5];
pub const ROD_THICKNESS: f64 = 0.2;
pub const SQUARE_SIDE: f64 = 0.5;
pub const SQUARE_ANGLE: f64 = PI / 6.0;
pub const SQUARE_START: Point = [0.4, 0.5];

pub fn bounding_box(problem: Problem) -> [f64; 4] {
    match problem {
        Problem::PoissonHole => [0.0, 0.0, 2.0, 1.0],
        Problem::ElasticityRod => [0.0, 0.0, 1.5, 1.0],
        Problem::MovingSquare => [0.0, 0.0, 1.0, 1.0],
    }
}

pub fn background_grid(cfg: &ExperimentConfig) -> Result<BackgroundGrid> {
    Ok(BackgroundGrid::new(bounding_box(cfg.problem), cfg.grid[0], cfg.grid[1])?)
}

/// Rectangle `[0.45, 1.55] × [0.2, 0.8]` capped by half ellipses with
/// semi-axes `(0.35, 0.3)`.
pub fn blade_outline() -> Curve {
    let mut pts = vec![[0.45, 0.2], [1.0, 0.2]];
    let segs = 32;
    for i in 0..=segs {
        let t = -PI / 2.0 + PI * i as f64 / segs as f64;
        pts.push([1.55 + 0.35 * t.cos(), 0.5 + 0.3 * t.sin()]);
    }
    pts.push([1.0, 0.8]);
    for i in 0..segs {
        let t = PI / 2.0 + PI * i as f64 / segs as f64;
        pts.push([0.45 + 0.35 * t.cos(), 0.5 + 0.3 * t.sin()]);
    }
    Curve::new(pts, vec![tags::OUTER]).expect("valid blade outline")
}

/// Band of width [`ROD_THICKNESS`] around a circular arc through
/// `(0.15, 0.3)` and `(1.35, 0.3)` with the given sagitta. The left end is
/// clamped, the right end loaded, the long sides free.
pub fn rod_outline(sagitta: f64) -> Curve {
    let (x0, x1, y0) = (0.15, 1.35, 0.3);
    let half = ROD_THICKNESS / 2.0;
    let segs = 60;
    let (outer, inner): (Vec<Point>, Vec<Point>) = if sagitta.abs() < 1e-9 {
        (0..=segs)
            .map(|i| {
                let x = x0 + (x1 - x0) * i as f64 / segs as f64;
                ([x, y0 + half], [x, y0 - half])
            })
            .unzip()
    } else {
        let l = x1 - x0;
        let r = (l * l / 4.0 + sagitta * sagitta) / (2.0 * sagitta);
        let c = [(x0 + x1) / 2.0, y0 + sagitta - r];
        let phi = (l / 2.0 / r).asin();
        (0..=segs)
            .map(|i| {
                let t = PI / 2.0 + phi - 2.0 * phi * i as f64 / segs as f64;
                let (ct, st) = (t.cos(), t.sin());
                ([c[0] + (r + half) * ct, c[1] + (r + half) * st], [c[0] + (r - half) * ct, c[1] + (r - half) * st])
            })
            .unzip()
    };
    let mut pts = outer;
    pts.extend(inner.into_iter().rev());
    let mut t = vec![tags::FREE; segs];
    t.push(tags::LOADED);
    t.extend(std::iter::repeat(tags::FREE).take(segs));
    t.push(tags::CLAMPED);
    Curve::new(pts, t).expect("valid rod outline")
}

pub fn rotated_square(center: Point, side: f64, angle: f64) -> Curve {
    let h = side / 2.0;
    let (c, s) = (angle.cos(), angle.sin());
    let pts = [[-h, -h], [h, -h], [h, h], [-h, h]]
        .iter()
        .map(|p| [center[0] + c * p[0] - s * p[1], center[1] + s * p[0] + c * p[1]])
        .collect();
    Curve::new(pts, vec![tags::OUTER]).expect("valid square")
}

fn inside_box(g: &Geometry, bbox: [f64; 4]) -> bool {
    let b = g.bounding_box();
    b[0] > bbox[0] && b[1] > bbox[1] && b[2] < bbox[2] && b[3] < bbox[3]
}

/// Deterministic geometry list for the configured problem.
pub fn generate_geometry_sequence(cfg: &ExperimentConfig) -> Result<Vec<Geometry>> {
    let s = &cfg.sequence;
    let shift = |i: usize| [s.offset[0] * i as f64, s.offset[1] * i as f64];
    let bbox = bounding_box(cfg.problem);
    let mut out = Vec::with_capacity(s.steps);
    for i in 0..s.steps {
        let d = shift(i);
        let g = match cfg.problem {
            Problem::PoissonHole => {
                let outer = blade_outline();
                let center = [HOLE_START[0] + d[0], HOLE_START[1] + d[1]];
                let hole = Curve::circle(center, HOLE_RADIUS, 48, 0.0, tags::HOLE);
                let probe = Geometry::new(outer.clone(), vec![]);
                let clear = (0..8).all(|j| {
                    let t = PI * j as f64 / 4.0;
                    let r = HOLE_RADIUS + 0.03;
                    probe.contains([center[0] + r * t.cos(), center[1] + r * t.sin()])
                });
                if !clear {
                    bail!("step {i}: hole leaves the blade");
                }
                Geometry::new(outer, vec![hole])
            }
            Problem::ElasticityRod => {
                let sag = s.sagitta + s.sagitta_step * i as f64;
                if sag < 0.0 {
                    bail!("step {i}: negative rod sagitta {sag}");
                }
                Geometry::new(rod_outline(sag), vec![])
            }
            Problem::MovingSquare => {
                let center = [SQUARE_START[0] + d[0], SQUARE_START[1] + d[1]];
                Geometry::new(rotated_square(center, SQUARE_SIDE, SQUARE_ANGLE), vec![])
            }
        };
        if !inside_box(&g, bbox) {
            bail!("step {i}: geometry leaves the feasible region");
        }
        out.push(g);
    }
    Ok(out)
}
