//! Structured background triangulation adapted to curved geometries.
//!
//! A [`BackgroundGrid`] never changes between optimization steps; an
//! [`AdaptedMesh`] records which background nodes and elements are active
//! for one geometry, and where boundary nodes were snapped to.

mod adapt;
mod geometry;
mod grid;
mod query;

pub use adapt::{adapt_to_boundary, adapt_with_options, AdaptOptions, AdaptedMesh, BoundaryEdge, NodeStatus};
pub use geometry::{closest_on_segment, dist, segment_intersection, Curve, Geometry, Point, Segment};
pub use grid::BackgroundGrid;
pub use query::BARY_TOL;

use serde::{Deserialize, Serialize};

/// Geometry input document: background grid plus curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDocument {
    pub bbox: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub geometry: Geometry,
}

impl GeometryDocument {
    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> crate::Result<AdaptedMesh> {
        let grid = BackgroundGrid::new(self.bbox, self.nx, self.ny)?;
        adapt_to_boundary(&grid, &self.geometry)
    }
}
