use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::ops::{IMat, LatticeKind, Operation, IDENTITY};
use crate::lattice_fourier::Index;

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
const M3A: IMat = [[-1, 1], [0, 1]];
const M3B: IMat = [[1, 0], [1, -1]];
const M31A: IMat = [[1, -1], [0, -1]];
const M31B: IMat = [[-1, 0], [-1, 1]];

pub(crate) const H: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Centering {
    Primitive,
    Centered,
}

/// Reflection conditions, stated in the conventional (ITA) indexing of the setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbsenceRule {
    /// Conventional centred cell: h + k odd absent. Primitive (rhombic) indices carry none.
    CenteringHPlusKOdd,
    /// (h, 0) with h odd absent.
    H0Odd,
    /// (0, k) with k odd absent.
    ZeroKOdd,
}

impl AbsenceRule {
    /// Whether a primitive-basis index is extinguished by this rule.
    pub fn forbids(self, h: Index) -> bool {
        match self {
            AbsenceRule::CenteringHPlusKOdd => false,
            AbsenceRule::H0Odd => h.1 == 0 && h.0 % 2 != 0,
            AbsenceRule::ZeroKOdd => h.0 == 0 && h.1 % 2 != 0,
        }
    }
}

impl fmt::Display for AbsenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbsenceRule::CenteringHPlusKOdd => "hk: h+k odd forbidden (conventional centred cell)",
            AbsenceRule::H0Odd => "h0: h odd forbidden",
            AbsenceRule::ZeroKOdd => "0k: k odd forbidden",
        })
    }
}

/// One of the 21 plane-group settings, with its operations in the conventional primitive
/// setting (centred groups use the rhombic primitive cell with A = a + b, B = b - a).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSetting {
    pub name: &'static str,
    ops: Vec<Operation>,
    pub lattice: LatticeKind,
    pub centering: Centering,
}

impl GroupSetting {
    fn new(name: &'static str, lattice: LatticeKind, centering: Centering, ops: Vec<Operation>) -> Self {
        Self {
            name,
            ops,
            lattice,
            centering,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Number of non-translational operations per lattice point.
    pub fn k(&self) -> usize {
        self.ops.len()
    }

    pub fn operations(&self) -> &[Operation] {
        &self.ops
    }

    /// Operations expressed in a basis related to the setting basis by D' = D U.
    pub fn operations_in(&self, u: IMat) -> Vec<Operation> {
        if u == IDENTITY {
            return self.ops.clone();
        }
        self.ops.iter().map(|o| o.conjugated(u)).collect()
    }

    /// True when every operation of `other` belongs to this group at the same origin.
    pub fn contains_group(&self, other: &GroupSetting) -> bool {
        other
            .ops
            .iter()
            .all(|o| self.ops.iter().any(|p| p.same_mod_lattice(o)))
    }

    pub fn contains_op(&self, op: &Operation) -> bool {
        self.ops.iter().any(|p| p.same_mod_lattice(op))
    }

    /// Whether (h, k) is extinguished by the group's translation parts (setting basis).
    pub fn is_absent(&self, h: Index) -> bool {
        absent_under(&self.ops, h)
    }

    pub fn absence_rules(&self) -> Vec<AbsenceRule> {
        let mut rules = Vec::new();
        if self.centering == Centering::Centered {
            rules.push(AbsenceRule::CenteringHPlusKOdd);
        }
        if self.is_absent((1, 0)) {
            rules.push(AbsenceRule::H0Odd);
        }
        if self.is_absent((0, 1)) {
            rules.push(AbsenceRule::ZeroKOdd);
        }
        rules
    }

    pub fn is_centrosymmetric(&self) -> bool {
        self.ops.iter().any(|o| o.r == TWO)
    }
}

/// h is absent if some operation fixes it while carrying a non-integral phase h.t.
pub(crate) fn absent_under(ops: &[Operation], h: Index) -> bool {
    ops.iter().any(|o| {
        o.apply_index(h) == h && {
            let p = o.index_phase(h);
            (p - p.round()).abs() > 1e-9
        }
    })
}

fn lin(rs: &[IMat]) -> Vec<Operation> {
    rs.iter().map(|&r| Operation::linear(r)).collect()
}

fn with(mut base: Vec<Operation>, extra: &[(IMat, [f64; 2])]) -> Vec<Operation> {
    base.extend(extra.iter().map(|&(r, t)| Operation::new(r, t)));
    base
}

static PLANE_GROUPS: LazyLock<Vec<GroupSetting>> = LazyLock::new(|| {
    use Centering::*;
    use LatticeKind::*;
    let p3 = lin(&[IDENTITY, R3, R3I]);
    let p4 = lin(&[IDENTITY, TWO, R4, R4I]);
    let p6 = lin(&[IDENTITY, TWO, R3, R3I, R6, R6I]);
    vec![
        GroupSetting::new("p1", Oblique, Primitive, lin(&[IDENTITY])),
        GroupSetting::new("p2", Oblique, Primitive, lin(&[IDENTITY, TWO])),
        GroupSetting::new("p1m1", Rectangular, Primitive, lin(&[IDENTITY, MX])),
        GroupSetting::new("p11m", Rectangular, Primitive, lin(&[IDENTITY, MY])),
        GroupSetting::new("p1g1", Rectangular, Primitive, with(lin(&[IDENTITY]), &[(MX, [0.0, H])])),
        GroupSetting::new("p11g", Rectangular, Primitive, with(lin(&[IDENTITY]), &[(MY, [H, 0.0])])),
        GroupSetting::new("c1m1", Rhombic, Centered, lin(&[IDENTITY, NSW])),
        GroupSetting::new("c11m", Rhombic, Centered, lin(&[IDENTITY, SW])),
        GroupSetting::new("p3", Hexagonal, Primitive, p3.clone()),
        GroupSetting::new("p2mm", Rectangular, Primitive, lin(&[IDENTITY, TWO, MX, MY])),
        GroupSetting::new(
            "p2mg",
            Rectangular,
            Primitive,
            with(lin(&[IDENTITY, TWO]), &[(MX, [H, 0.0]), (MY, [H, 0.0])]),
        ),
        GroupSetting::new(
            "p2gm",
            Rectangular,
            Primitive,
            with(lin(&[IDENTITY, TWO]), &[(MX, [0.0, H]), (MY, [0.0, H])]),
        ),
        GroupSetting::new(
            "p2gg",
            Rectangular,
            Primitive,
            with(lin(&[IDENTITY, TWO]), &[(MX, [H, H]), (MY, [H, H])]),
        ),
        GroupSetting::new("c2mm", Rhombic, Centered, lin(&[IDENTITY, TWO, SW, NSW])),
        GroupSetting::new("p4", Square, Primitive, p4.clone()),
        GroupSetting::new("p3m1", Hexagonal, Primitive, with(p3.clone(), &[(NSW, [0.0; 2]), (M3A, [0.0; 2]), (M3B, [0.0; 2])])),
        GroupSetting::new("p31m", Hexagonal, Primitive, with(p3, &[(SW, [0.0; 2]), (M31A, [0.0; 2]), (M31B, [0.0; 2])])),
        GroupSetting::new("p6", Hexagonal, Primitive, p6.clone()),
        GroupSetting::new("p4mm", Square, Primitive, with(p4.clone(), &[(MX, [0.0; 2]), (MY, [0.0; 2]), (SW, [0.0; 2]), (NSW, [0.0; 2])])),
        GroupSetting::new(
            "p4gm",
            Square,
            Primitive,
            with(p4, &[(MX, [H, H]), (MY, [H, H]), (SW, [H, H]), (NSW, [H, H])]),
        ),
        GroupSetting::new(
            "p6mm",
            Hexagonal,
            Primitive,
            with(
                p6,
                &[
                    (NSW, [0.0; 2]),
                    (M3A, [0.0; 2]),
                    (M3B, [0.0; 2]),
                    (SW, [0.0; 2]),
                    (M31A, [0.0; 2]),
                    (M31B, [0.0; 2]),
                ],
            ),
        ),
    ]
});

/// All 21 settings in the fixed order used for tie-breaking and reporting.
pub fn plane_groups() -> &'static [GroupSetting] {
    &PLANE_GROUPS
}

pub fn plane_group(name: &str) -> Option<&'static GroupSetting> {
    let canonical = match name {
        "pm" => "p1m1",
        "pg" => "p1g1",
        "cm" => "c1m1",
        "pmm" => "p2mm",
        "pmg" => "p2mg",
        "pgg" => "p2gg",
        "cmm" => "c2mm",
        "p4m" => "p4mm",
        "p4g" => "p4gm",
        "p6m" => "p6mm",
        other => other,
    };
    PLANE_GROUPS.iter().find(|g| g.name == canonical)
}

/// One representative setting for each of the 17 plane groups.
pub const SEVENTEEN: [&str; 17] = [
    "p1", "p2", "p1m1", "p1g1", "c1m1", "p2mm", "p2mg", "p2gg", "c2mm", "p4", "p4mm", "p4gm", "p3", "p3m1",
    "p31m", "p6", "p6mm",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_group_closed() {
        for g in plane_groups() {
            for a in g.operations() {
                for b in g.operations() {
                    assert!(g.contains_op(&a.compose(b)), "{} not closed", g.name);
                }
                assert!(g.contains_op(&a.inverse()), "{} lacks inverse", g.name);
            }
            assert!([1, 2, 3, 4, 6, 8, 12].contains(&g.k()));
        }
        assert_eq!(plane_groups().len(), 21);
    }

    #[test]
    fn orders() {
        let k = |n: &str| plane_group(n).unwrap().k();
        assert_eq!(
            [k("p1"), k("p2"), k("p1m1"), k("p3"), k("p2gg"), k("p4"), k("p6"), k("p4gm"), k("p6mm")],
            [1, 2, 2, 3, 4, 4, 6, 8, 12]
        );
    }

    #[test]
    fn absence_rules_match_predicate() {
        for g in plane_groups() {
            let rules = g.absence_rules();
            for h in -6..=6 {
                for k in -6..=6 {
                    let by_rule = rules.iter().any(|r| r.forbids((h, k)));
                    assert_eq!(by_rule, g.is_absent((h, k)), "{} at ({h},{k})", g.name);
                }
            }
        }
        assert_eq!(plane_group("p2gg").unwrap().absence_rules(), vec![AbsenceRule::H0Odd, AbsenceRule::ZeroKOdd]);
        assert_eq!(plane_group("p1g1").unwrap().absence_rules(), vec![AbsenceRule::ZeroKOdd]);
        assert_eq!(plane_group("p11g").unwrap().absence_rules(), vec![AbsenceRule::H0Odd]);
        assert_eq!(plane_group("c1m1").unwrap().absence_rules(), vec![AbsenceRule::CenteringHPlusKOdd]);
        assert!(plane_group("p2").unwrap().absence_rules().is_empty());
    }
}
