use std::collections::BTreeSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::groups::GroupSetting;
use super::ops::{IMat, LatticeKind, IDENTITY};

const TWO: IMat = [[-1, 0], [0, -1]];
const MX: IMat = [[-1, 0], [0, 1]];
const MY: IMat = [[1, 0], [0, -1]];
const SW: IMat = [[0, 1], [1, 0]];
const NSW: IMat = [[0, -1], [-1, 0]];
const R4: IMat = [[0, -1], [1, 0]];
const R4I: IMat = [[0, 1], [-1, 0]];
const R3: IMat = [[0, -1], [1, -1]];
const R3I: IMat = [[-1, 1], [-1, 0]];
const R6: IMat = [[1, -1], [1, 0]];
const R6I: IMat = [[0, 1], [-1, 1]];
const HEX_MIRRORS: [IMat; 6] = [
    NSW,
    [[-1, 1], [0, 1]],
    [[1, 0], [1, -1]],
    SW,
    [[1, -1], [0, -1]],
    [[-1, 0], [-1, 1]],
];

/// A projected Laue class (2D point group of an amplitude map).
///
/// Classes 8, 10, 12 and their dihedral extensions exist only as tree nodes: they have no
/// integral action on a 2D lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointClass {
    /// Unique key, e.g. "2mm" (mirrors normal to a and b) or "2mm(d)" (diagonal mirrors).
    pub id: &'static str,
    /// Class symbol shared by all settings.
    pub name: &'static str,
    pub k: usize,
    matrices: Option<Vec<IMat>>,
    pub lattice: LatticeKind,
}

impl PointClass {
    fn new(id: &'static str, name: &'static str, lattice: LatticeKind, mats: &[IMat]) -> Self {
        Self {
            id,
            name,
            k: mats.len(),
            matrices: Some(mats.to_vec()),
            lattice,
        }
    }

    fn tree_only(name: &'static str, k: usize) -> Self {
        Self {
            id: name,
            name,
            k,
            matrices: None,
            lattice: LatticeKind::Hexagonal,
        }
    }

    pub fn matrices(&self) -> Option<&[IMat]> {
        self.matrices.as_deref()
    }

    pub fn is_lattice_compatible(&self) -> bool {
        self.matrices.is_some()
    }
}

static POINT_CLASSES: LazyLock<Vec<PointClass>> = LazyLock::new(|| {
    use LatticeKind::*;
    let mut c6mm = vec![IDENTITY, TWO, R3, R3I, R6, R6I];
    c6mm.extend(HEX_MIRRORS);
    vec![
        PointClass::new("2", "2", Oblique, &[IDENTITY, TWO]),
        PointClass::new("2mm", "2mm", Rectangular, &[IDENTITY, TWO, MX, MY]),
        PointClass::new("2mm(d)", "2mm", Rhombic, &[IDENTITY, TWO, SW, NSW]),
        PointClass::new("4", "4", Square, &[IDENTITY, TWO, R4, R4I]),
        PointClass::new("6", "6", Hexagonal, &[IDENTITY, TWO, R3, R3I, R6, R6I]),
        PointClass::new("4mm", "4mm", Square, &[IDENTITY, TWO, R4, R4I, MX, MY, SW, NSW]),
        PointClass::new("6mm", "6mm", Hexagonal, &c6mm),
        PointClass::tree_only("8", 8),
        PointClass::tree_only("10", 10),
        PointClass::tree_only("12", 12),
        PointClass::tree_only("8mm", 16),
        PointClass::tree_only("10mm", 20),
        PointClass::tree_only("12mm", 24),
    ]
});

pub fn point_classes() -> &'static [PointClass] {
    &POINT_CLASSES
}

/// Classes with an integral action on a 2D lattice, in fixed order.
pub fn laue_classes() -> impl Iterator<Item = &'static PointClass> {
    POINT_CLASSES.iter().filter(|c| c.is_lattice_compatible())
}

pub fn point_class(id: &str) -> Option<&'static PointClass> {
    POINT_CLASSES.iter().find(|c| c.id == id)
}

/// The Laue class of a plane group: the point group generated by its linear parts and -1.
pub fn compatible(group: &GroupSetting) -> &'static PointClass {
    let mut set: BTreeSet<IMat> = BTreeSet::new();
    for op in group.operations() {
        set.insert(op.r);
        set.insert([[-op.r[0][0], -op.r[0][1]], [-op.r[1][0], -op.r[1][1]]]);
    }
    laue_classes()
        .find(|c| c.matrices().map(|m| m.iter().copied().collect::<BTreeSet<_>>()) == Some(set.clone()))
        .expect("every plane group has a lattice-compatible Laue class")
}
