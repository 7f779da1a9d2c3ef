use crate::mesh::{AdaptedMesh, NodeStatus};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// How a background node relates across two meshes on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    /// Active in both with the same status and position.
    Stable,
    /// Active in both; interior in one, boundary in the other.
    StatusChanged,
    /// Active in both with the same status but a different position.
    Moved,
    NewlyActive,
    NewlyInactive,
}

/// Per-node classification over the union of the two active node sets.
#[derive(Debug, Clone)]
pub struct NodeCorrespondence {
    /// Indexed by background node id; `None` for nodes inactive in both.
    pub classes: Vec<Option<NodeClass>>,
}

impl NodeCorrespondence {
    pub fn classify(old: &AdaptedMesh, new: &AdaptedMesh) -> Result<Self> {
        if old.grid != new.grid {
            return Err(Error::GridMismatch);
        }
        let classes = (0..old.grid.node_count())
            .map(|id| match (old.status[id], new.status[id]) {
                (NodeStatus::Inactive, NodeStatus::Inactive) => None,
                (NodeStatus::Inactive, _) => Some(NodeClass::NewlyActive),
                (_, NodeStatus::Inactive) => Some(NodeClass::NewlyInactive),
                (a, b) if a != b => Some(NodeClass::StatusChanged),
                _ if old.positions[id] != new.positions[id] => Some(NodeClass::Moved),
                _ => Some(NodeClass::Stable),
            })
            .collect();
        Ok(Self { classes })
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|c| **c == Some(class)).count()
    }

    pub fn union_size(&self) -> usize {
        self.classes.iter().filter(|c| c.is_some()).count()
    }
}

/// Summary of one mapping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub stable: usize,
    pub status_changed: usize,
    pub moved: usize,
    pub newly_active: usize,
    pub newly_inactive: usize,
    /// Nodes whose values were recomputed by interpolation on the old mesh.
    pub recomputed: usize,
    /// Background ids of newly active nodes filled from at least two
    /// neighbors by the distance-weighted mean.
    pub extrapolated: Vec<usize>,
    /// Newly active nodes with exactly one previously active neighbor
    /// (value copied).
    pub single_neighbor: Vec<usize>,
    /// Newly active nodes with no previously active neighbor (set to zero).
    pub zero_filled: Vec<usize>,
    /// `‖W̃_j‖ / ‖W_j‖` per column.
    pub column_norm_ratio: Vec<f64>,
}

impl TransferReport {
    pub(crate) fn from_correspondence(c: &NodeCorrespondence) -> Self {
        Self {
            stable: c.count(NodeClass::Stable),
            status_changed: c.count(NodeClass::StatusChanged),
            moved: c.count(NodeClass::Moved),
            newly_active: c.count(NodeClass::NewlyActive),
            newly_inactive: c.count(NodeClass::NewlyInactive),
            ..Self::default()
        }
    }

    pub fn union_size(&self) -> usize {
        self.stable + self.status_changed + self.moved + self.newly_active + self.newly_inactive
    }

    /// `field,index,value` rows: class counts, then the flagged node lists,
    /// then the column norm ratios.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "field,index,value")?;
        for (name, v) in [
            ("stable", self.stable),
            ("status_changed", self.status_changed),
            ("moved", self.moved),
            ("newly_active", self.newly_active),
            ("newly_inactive", self.newly_inactive),
            ("recomputed", self.recomputed),
        ] {
            writeln!(out, "{name},,{v}")?;
        }
        for (name, list) in [
            ("extrapolated", &self.extrapolated),
            ("single_neighbor", &self.single_neighbor),
            ("zero_filled", &self.zero_filled),
        ] {
            for (i, id) in list.iter().enumerate() {
                writeln!(out, "{name},{i},{id}")?;
            }
        }
        for (j, r) in self.column_norm_ratio.iter().enumerate() {
            writeln!(out, "column_norm_ratio,{j},{r:e}")?;
        }
        Ok(())
    }
}
