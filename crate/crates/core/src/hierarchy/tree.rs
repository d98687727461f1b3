use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::gaic::equal_n_inset;
use crate::symmetrize::{plane_group, point_class};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: String,
    pub k: usize,
}

/// Maximal subgroup -> minimal supergroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub sub: String,
    pub sup: String,
    /// Equal-N ascent bound; `None` for edges out of a k = 1 node, where no ascent exists.
    pub inset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<TreeEdge>,
}

impl HierarchyTree {
    fn build(nodes: &[(&str, usize)], edges: &[(&str, &[&str])]) -> Self {
        let nodes: Vec<TreeNode> = nodes
            .iter()
            .map(|&(id, k)| TreeNode { id: id.to_string(), k })
            .collect();
        let k_of = |id: &str| nodes.iter().find(|n| n.id == id).expect("edge node listed").k;
        let mut out = Vec::new();
        for &(sub, sups) in edges {
            for &sup in sups {
                out.push(TreeEdge {
                    sub: sub.to_string(),
                    sup: sup.to_string(),
                    inset: equal_n_inset(k_of(sup), k_of(sub)),
                });
            }
        }
        Self { nodes, edges: out }
    }

    pub fn k(&self, id: &str) -> Option<usize> {
        self.nodes.iter().find(|n| n.id == id).map(|n| n.k)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.k(id).is_some()
    }

    pub fn maximal_subgroups(&self, id: &str) -> Vec<&str> {
        self.edges.iter().filter(|e| e.sup == id).map(|e| e.sub.as_str()).collect()
    }

    pub fn minimal_supergroups(&self, id: &str) -> Vec<&str> {
        self.edges.iter().filter(|e| e.sub == id).map(|e| e.sup.as_str()).collect()
    }

    /// `to` is reachable from `from` by climbing edges (reflexive).
    pub fn reachable(&self, from: &str, to: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                queue.extend(self.minimal_supergroups(n));
            }
        }
        false
    }

    /// All nodes below `id` (inclusive).
    pub fn down_closure(&self, id: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([id.to_string()]);
        while let Some(n) = queue.pop_front() {
            if seen.insert(n.clone()) {
                queue.extend(self.maximal_subgroups(&n).into_iter().map(str::to_string));
            }
        }
        seen
    }

    pub fn disjoint(&self, a: &str, b: &str) -> bool {
        !self.reachable(a, b) && !self.reachable(b, a)
    }
}

/// Translationengleiche maximal-subgroup relations among the 21 plane-group settings.
pub fn plane_edges() -> HierarchyTree {
    let nodes: Vec<(&str, usize)> = crate::symmetrize::plane_groups()
        .iter()
        .map(|g| (g.name, g.k()))
        .collect();
    HierarchyTree::build(
        &nodes,
        &[
            ("p1", &["p2", "p1m1", "p11m", "p1g1", "p11g", "c1m1", "c11m", "p3"]),
            ("p2", &["p2mm", "p2mg", "p2gm", "p2gg", "c2mm", "p4", "p6"]),
            ("p1m1", &["p2mm", "p2mg"]),
            ("p11m", &["p2mm", "p2gm"]),
            ("p1g1", &["p2gm", "p2gg"]),
            ("p11g", &["p2mg", "p2gg"]),
            ("c1m1", &["c2mm", "p3m1"]),
            ("c11m", &["c2mm", "p31m"]),
            ("p3", &["p3m1", "p31m", "p6"]),
            ("p2mm", &["p4mm"]),
            ("p2gg", &["p4gm"]),
            ("c2mm", &["p4mm", "p4gm", "p6mm"]),
            ("p4", &["p4mm", "p4gm"]),
            ("p3m1", &["p6mm"]),
            ("p31m", &["p6mm"]),
            ("p6", &["p6mm"]),
        ],
    )
}

/// Projected Laue classes with both 2mm orientations kept apart.
pub fn laue_edges() -> HierarchyTree {
    let ids = ["2", "2mm", "2mm(d)", "4", "6", "4mm", "6mm"];
    let nodes: Vec<(&str, usize)> = ids.iter().map(|&i| (i, point_class(i).unwrap().k)).collect();
    HierarchyTree::build(
        &nodes,
        &[
            ("2", &["2mm", "2mm(d)", "4", "6"]),
            ("2mm", &["4mm"]),
            ("2mm(d)", &["4mm", "6mm"]),
            ("4", &["4mm"]),
            ("6", &["6mm"]),
        ],
    )
}

/// Laue classes of amplitude maps including the non-crystallographic 8, 10 and 12 families.
pub fn quasicrystal_edges() -> HierarchyTree {
    let ids = ["2", "2mm", "4", "6", "8", "10", "12", "4mm", "6mm", "8mm", "10mm", "12mm"];
    let nodes: Vec<(&str, usize)> = ids.iter().map(|&i| (i, point_class(i).unwrap().k)).collect();
    HierarchyTree::build(
        &nodes,
        &[
            ("2", &["2mm", "4", "6", "10"]),
            ("4", &["4mm", "8", "12"]),
            ("6", &["6mm", "12"]),
            ("8", &["8mm"]),
            ("10", &["10mm"]),
            ("12", &["12mm"]),
            ("2mm", &["4mm", "6mm", "10mm"]),
            ("4mm", &["8mm", "12mm"]),
            ("6mm", &["12mm"]),
        ],
    )
}

/// Plane group name -> operation count, for settings known to the registry.
pub fn plane_k(id: &str) -> Option<usize> {
    plane_group(id).map(|g| g.k())
}
