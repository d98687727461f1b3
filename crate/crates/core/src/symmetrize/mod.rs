//! Plane-group and point-class symmetrization of coefficient sets.
//!
//! Convention: with `F(h) = sum rho(x) exp(-2 pi i h.x)`, a pattern invariant under
//! x -> R x + t satisfies `F(h R) = F(h) exp(2 pi i h.t)`. Symmetrization averages the
//! phase-aligned members of each orbit and redistributes the mean, which is the
//! least-squares projection onto the set of invariant coefficient sets.

mod groups;
mod model;
mod ops;
mod origin;
mod point;
mod project;

use crate::error::{Error, Result};
use crate::lattice_fourier::CoefficientSet;

pub use groups::{plane_group, plane_groups, AbsenceRule, Centering, GroupSetting, SEVENTEEN};
pub use model::{registry, LaueModel, ModelFit, ModelLevel, ModelRegistry, PlaneModel, SymmetryModel};
pub use ops::{act, mat_mul, unimodular_inverse, IMat, LatticeKind, MetricTolerances, Operation, IDENTITY};
pub use origin::OriginShift;
pub use point::{compatible, laue_classes, point_class, point_classes, PointClass};

pub(crate) use origin::refine_origin_with_ops;

fn setting_for(set: &CoefficientSet, kind: LatticeKind, tol: &MetricTolerances, name: &str) -> Result<IMat> {
    match set.basis {
        None => Ok(IDENTITY),
        Some(b) => kind
            .setting_transform(&b.direct(), tol)
            .ok_or_else(|| Error::MetricMismatch { model: name.to_string() }),
    }
}

pub(crate) fn project_with_ops(set: &CoefficientSet, ops: &[Operation]) -> Result<CoefficientSet> {
    let orbits = project::plane_orbits(set.map().keys(), ops);
    let (coeffs, absent) = project::project(set.map(), &orbits);
    if coeffs.is_empty() {
        return Err(Error::EmptyAfterAbsences);
    }
    Ok(set.with_coefficients(coeffs, absent))
}

pub(crate) fn project_point_class(set: &CoefficientSet, class: &PointClass, u: IMat) -> Result<CoefficientSet> {
    let mats = class.matrices().ok_or_else(|| Error::MetricMismatch {
        model: class.id.to_string(),
    })?;
    let ui = unimodular_inverse(u);
    let mats: Vec<IMat> = mats.iter().map(|&r| mat_mul(mat_mul(u, r), ui)).collect();
    let orbits = project::point_orbits(set.map().keys(), &mats);
    Ok(set.with_coefficients(project::project_amplitudes(set.map(), &orbits), Default::default()))
}

/// Projects onto `group` at the set's current origin (see [`refine_origin`]).
pub fn symmetrize_plane_group(set: &CoefficientSet, group: &GroupSetting) -> Result<CoefficientSet> {
    symmetrize_plane_group_with(set, group, &MetricTolerances::default())
}

pub fn symmetrize_plane_group_with(
    set: &CoefficientSet,
    group: &GroupSetting,
    tol: &MetricTolerances,
) -> Result<CoefficientSet> {
    let u = setting_for(set, group.lattice, tol, group.name)?;
    project_with_ops(set, &group.operations_in(u))
}

/// Orbit-averages amplitudes under the class; phases are left as they are.
pub fn symmetrize_point_class(set: &CoefficientSet, class: &PointClass) -> Result<CoefficientSet> {
    symmetrize_point_class_with(set, class, &MetricTolerances::default())
}

pub fn symmetrize_point_class_with(
    set: &CoefficientSet,
    class: &PointClass,
    tol: &MetricTolerances,
) -> Result<CoefficientSet> {
    let u = setting_for(set, class.lattice, tol, class.id)?;
    project_point_class(set, class, u)
}

/// Shift s (applied as F(h) exp(-2 pi i h.s)) that best fits the group.
pub fn refine_origin(set: &CoefficientSet, group: &GroupSetting) -> Result<OriginShift> {
    refine_origin_with(set, group, &MetricTolerances::default())
}

pub fn refine_origin_with(set: &CoefficientSet, group: &GroupSetting, tol: &MetricTolerances) -> Result<OriginShift> {
    let u = setting_for(set, group.lattice, tol, group.name)?;
    Ok(refine_origin_with_ops(set, &group.operations_in(u)))
}

pub fn absence_rules(group: &GroupSetting) -> Vec<AbsenceRule> {
    group.absence_rules()
}

/// Group operations in the basis of `set` (identity setting when it has no basis).
pub fn operations_for(set: &CoefficientSet, group: &GroupSetting, tol: &MetricTolerances) -> Result<Vec<Operation>> {
    let u = setting_for(set, group.lattice, tol, group.name)?;
    Ok(group.operations_in(u))
}
