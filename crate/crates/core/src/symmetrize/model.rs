use std::collections::HashMap;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::groups::{plane_groups, GroupSetting};
use super::ops::{IMat, LatticeKind, MetricTolerances, IDENTITY};
use super::origin::OriginShift;
use super::point::{laue_classes, PointClass};
use super::{project_point_class, project_with_ops, refine_origin_with_ops};
use crate::error::{Error, Result};
use crate::gaic::{residual_amplitude, residual_complex};
use crate::lattice_fourier::CoefficientSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelLevel {
    Plane,
    Laue,
}

/// Outcome of fitting one symmetry model to a translation-averaged set.
#[derive(Debug, Clone)]
pub struct ModelFit {
    pub id: String,
    pub k: usize,
    /// Symmetrized coefficients.
    pub model: CoefficientSet,
    /// The translation-averaged set at the model's origin.
    pub reference: CoefficientSet,
    pub origin: Option<OriginShift>,
    pub j_complex: f64,
    pub j_amplitude: f64,
}

impl ModelFit {
    pub fn n_count(&self) -> usize {
        self.model.n_count()
    }
}

/// A symmetry hypothesis that can be fitted to a coefficient set.
pub trait SymmetryModel: Send + Sync + std::fmt::Debug {
    fn id(&self) -> &str;
    fn order(&self) -> usize;
    fn level(&self) -> ModelLevel;
    fn lattice(&self) -> LatticeKind;

    /// Basis change into the model's setting, `None` when the metric rules it out.
    /// Sets without a lattice basis are taken to be indexed in the setting already.
    fn setting(&self, set: &CoefficientSet, tol: &MetricTolerances) -> Option<IMat> {
        match set.basis {
            None => Some(IDENTITY),
            Some(b) => self.lattice().setting_transform(&b.direct(), tol),
        }
    }

    fn fit(&self, trans: &CoefficientSet, tol: &MetricTolerances) -> Result<ModelFit>;
}

#[derive(Debug)]
pub struct PlaneModel(pub &'static GroupSetting);

#[derive(Debug)]
pub struct LaueModel(pub &'static PointClass);

impl SymmetryModel for PlaneModel {
    fn id(&self) -> &str {
        self.0.name
    }

    fn order(&self) -> usize {
        self.0.k()
    }

    fn level(&self) -> ModelLevel {
        ModelLevel::Plane
    }

    fn lattice(&self) -> LatticeKind {
        self.0.lattice
    }

    fn fit(&self, trans: &CoefficientSet, tol: &MetricTolerances) -> Result<ModelFit> {
        let u = self.setting(trans, tol).ok_or_else(|| Error::MetricMismatch {
            model: self.0.name.to_string(),
        })?;
        let ops = self.0.operations_in(u);
        let origin = refine_origin_with_ops(trans, &ops);
        let reference = trans.shifted(origin.shift);
        let model = project_with_ops(&reference, &ops)?;
        Ok(ModelFit {
            id: self.0.name.to_string(),
            k: self.0.k(),
            j_complex: residual_complex(&reference, &model)?,
            j_amplitude: residual_amplitude(&reference, &model)?,
            model,
            reference,
            origin: Some(origin),
        })
    }
}

impl SymmetryModel for LaueModel {
    fn id(&self) -> &str {
        self.0.id
    }

    fn order(&self) -> usize {
        self.0.k
    }

    fn level(&self) -> ModelLevel {
        ModelLevel::Laue
    }

    fn lattice(&self) -> LatticeKind {
        self.0.lattice
    }

    fn fit(&self, trans: &CoefficientSet, tol: &MetricTolerances) -> Result<ModelFit> {
        let u = self.setting(trans, tol).ok_or_else(|| Error::MetricMismatch {
            model: self.0.id.to_string(),
        })?;
        let model = project_point_class(trans, self.0, u)?;
        Ok(ModelFit {
            id: self.0.id.to_string(),
            k: self.0.k,
            j_complex: residual_complex(trans, &model)?,
            j_amplitude: residual_amplitude(trans, &model)?,
            model,
            reference: trans.clone(),
            origin: None,
        })
    }
}

/// Name-indexed registry of every fittable symmetry model.
pub struct ModelRegistry {
    models: Vec<Box<dyn SymmetryModel>>,
    by_id: HashMap<String, usize>,
}

impl ModelRegistry {
    fn build() -> Self {
        let mut models: Vec<Box<dyn SymmetryModel>> = Vec::new();
        for g in plane_groups() {
            models.push(Box::new(PlaneModel(g)));
        }
        for c in laue_classes() {
            models.push(Box::new(LaueModel(c)));
        }
        let by_id = models.iter().enumerate().map(|(i, m)| (m.id().to_string(), i)).collect();
        Self { models, by_id }
    }

    pub fn get(&self, id: &str) -> Result<&dyn SymmetryModel> {
        self.by_id
            .get(id)
            .map(|&i| self.models[i].as_ref())
            .ok_or_else(|| Error::UnknownModel(id.to_string()))
    }

    pub fn all(&self) -> impl Iterator<Item = &dyn SymmetryModel> {
        self.models.iter().map(|m| m.as_ref())
    }

    pub fn level(&self, level: ModelLevel) -> impl Iterator<Item = &dyn SymmetryModel> {
        self.all().filter(move |m| m.level() == level)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.all().map(|m| m.id()).collect()
    }
}

static REGISTRY: LazyLock<ModelRegistry> = LazyLock::new(ModelRegistry::build);

pub fn registry() -> &'static ModelRegistry {
    &REGISTRY
}
