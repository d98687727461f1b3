//! Symmetry hierarchy trees and the genuine / pseudosymmetry classification.

mod classify;
mod tree;

pub use classify::{
    anchor, classify, decide, fit_models, table_from_models, AscentRecord, ClassificationResult, ClassifyConfig,
    ConfidenceEntry, Consistency, ConsistencyStatus, Label, ResidualEntry, ResidualRow, ResidualTable,
};
pub use tree::{laue_edges, plane_edges, plane_k, quasicrystal_edges, HierarchyTree, TreeEdge, TreeNode};

use crate::symmetrize::{GroupSetting, PointClass};

/// Laue class consistent with a plane group.
pub fn compatible(group: &GroupSetting) -> &'static PointClass {
    crate::symmetrize::compatible(group)
}

/// True iff neither setting is reachable from the other in the plane tree.
pub fn disjoint(a: &GroupSetting, b: &GroupSetting) -> bool {
    plane_edges().disjoint(a.name, b.name)
}
