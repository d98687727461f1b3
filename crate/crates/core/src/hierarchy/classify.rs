use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{laue_edges, plane_edges, HierarchyTree};
use crate::error::{Error, Result};
use crate::gaic::{ascent_test, confidence_level, gaic_value, noise_estimate};
use crate::lattice_fourier::CoefficientSet;
use crate::symmetrize::{
    compatible, laue_classes, plane_group, plane_groups, point_class, registry, MetricTolerances, ModelFit,
    ModelLevel,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    /// Non-genuine models with J <= pseudo_band * J(anchor) are labelled pseudosymmetries.
    pub pseudo_band: f64,
    pub metric: MetricTolerances,
    /// Residuals below residual_floor * total power are raised to that floor.
    pub residual_floor: f64,
    /// Anchor residual, as a fraction of what a symmetry-free pattern would give, above
    /// which the pattern is treated as having translation symmetry only.
    pub translation_only_threshold: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            pseudo_band: 10.0,
            metric: MetricTolerances::default(),
            residual_floor: 1e-9,
            translation_only_threshold: 0.25,
        }
    }
}

/// One model's residuals. `applicable = false` means the lattice metric excludes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub id: String,
    pub k: usize,
    pub n_count: usize,
    pub j_complex: f64,
    pub j_amplitude: f64,
    pub applicable: bool,
    pub origin: Option<[f64; 2]>,
    pub phase_residual: Option<f64>,
}

impl ResidualRow {
    pub fn new(id: &str, k: usize, n_count: usize, j_complex: f64, j_amplitude: f64) -> Self {
        Self {
            id: id.to_string(),
            k,
            n_count,
            j_complex,
            j_amplitude,
            applicable: true,
            origin: None,
            phase_residual: None,
        }
    }

    pub fn not_applicable(id: &str, k: usize) -> Self {
        Self {
            id: id.to_string(),
            k,
            n_count: 0,
            j_complex: f64::INFINITY,
            j_amplitude: f64::INFINITY,
            applicable: false,
            origin: None,
            phase_residual: None,
        }
    }
}

/// Plane-group rows (complex residuals) and Laue rows (amplitude residuals).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualTable {
    pub plane: Vec<ResidualRow>,
    pub laue: Vec<ResidualRow>,
    /// Total power of the translation-averaged set in residual units, when known.
    pub total_power: Option<f64>,
}

impl ResidualTable {
    /// Builds Laue rows from plane-model amplitude residuals: each class takes the smallest
    /// J_a among the plane models compatible with it.
    pub fn with_laue_from_plane(plane: Vec<ResidualRow>, total_power: Option<f64>) -> Self {
        let mut best: BTreeMap<&'static str, ResidualRow> = BTreeMap::new();
        for row in plane.iter().filter(|r| r.applicable && r.k >= 2) {
            let Some(g) = plane_group(&row.id) else { continue };
            let class = compatible(g);
            let cand = ResidualRow::new(class.id, class.k, row.n_count, row.j_amplitude, row.j_amplitude);
            match best.get(class.id) {
                Some(b) if b.j_amplitude <= cand.j_amplitude => {}
                _ => {
                    best.insert(class.id, cand);
                }
            }
        }
        let laue = laue_classes()
            .map(|c| {
                if c.id == "2" {
                    let n = plane.iter().find(|r| r.id == "p1").map_or(0, |r| r.n_count);
                    ResidualRow::new("2", 2, n, 0.0, 0.0)
                } else {
                    best.remove(c.id).unwrap_or_else(|| ResidualRow::not_applicable(c.id, c.k))
                }
            })
            .collect();
        Self {
            plane,
            laue,
            total_power,
        }
    }

    pub fn plane_row(&self, id: &str) -> Option<&ResidualRow> {
        self.plane.iter().find(|r| r.id == id)
    }

    pub fn laue_row(&self, id: &str) -> Option<&ResidualRow> {
        self.laue.iter().find(|r| r.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Pseudo,
    Rejected,
    #[serde(rename = "not_applicable")]
    NotApplicable,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub group: String,
    pub k: usize,
    pub n: usize,
    pub j_complex: Option<f64>,
    pub j_amplitude: Option<f64>,
    pub gaic: Option<f64>,
    pub label: Label,
    pub origin: Option<[f64; 2]>,
    pub phase_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentRecord {
    pub level: ModelLevel,
    pub supergroup: String,
    pub subgroup: String,
    pub j_supergroup: f64,
    pub j_subgroup: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// Whether the subgroup was genuine when tested (otherwise a pseudosymmetry in band).
    pub from_genuine: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceEntry {
    pub level: ModelLevel,
    pub supergroup: String,
    pub subgroup: String,
    pub ratio: f64,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsistencyStatus {
    Consistent,
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub status: ConsistencyStatus,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    #[serde(rename = "anchor")]
    pub anchor_plane: String,
    #[serde(rename = "best")]
    pub best_plane: String,
    #[serde(rename = "genuine")]
    pub genuine_plane: Vec<String>,
    #[serde(rename = "pseudo")]
    pub pseudo_plane: Vec<String>,
    #[serde(rename = "rejected")]
    pub rejected_plane: Vec<String>,
    pub not_applicable: Vec<String>,
    pub anchor_laue: Option<String>,
    pub genuine_laue: String,
    pub pseudo_laue: Vec<String>,
    pub rejected_laue: Vec<String>,
    pub not_applicable_laue: Vec<String>,
    pub consistency: Consistency,
    pub translation_only: bool,
    pub noise_eps2: Option<f64>,
    pub confidences: Vec<ConfidenceEntry>,
    pub residuals: Vec<ResidualEntry>,
    pub laue_residuals: Vec<ResidualEntry>,
    pub ascent_tests: Vec<AscentRecord>,
    pub warnings: Vec<String>,
    pub config: ClassifyConfig,
}

impl ClassificationResult {
    pub fn is_consistent(&self) -> bool {
        self.consistency.status == ConsistencyStatus::Consistent
    }
}

/// Which node is the anchor over `rows`, restricted to `candidates`.
pub fn anchor<'a>(rows: &'a [ResidualRow], candidates: &[&str], floor: f64, use_amplitude: bool) -> Option<&'a ResidualRow> {
    let mut best: Option<(&ResidualRow, f64)> = None;
    for id in candidates {
        let Some(r) = rows.iter().find(|r| r.id == *id && r.applicable) else {
            continue;
        };
        let j = if use_amplitude { r.j_amplitude } else { r.j_complex }.max(floor);
        if best.is_none_or(|(_, b)| j < b) {
            best = Some((r, j));
        }
    }
    best.map(|(r, _)| r)
}

struct LevelOutcome {
    anchor: Option<String>,
    admitted: BTreeSet<String>,
    band: f64,
    tests: Vec<AscentRecord>,
    floored: BTreeMap<String, f64>,
}

/// Climbs `tree` from the anchor. A node is admitted when it has an admitted maximal
/// subgroup and the ascent inequality holds from every maximal subgroup that is admitted
/// or within the pseudosymmetry band.
fn climb(
    tree: &HierarchyTree,
    rows: &[ResidualRow],
    anchor_candidates: &[&str],
    level: ModelLevel,
    floor: f64,
    pseudo_band: f64,
) -> LevelOutcome {
    let use_amp = level == ModelLevel::Laue;
    let floored: BTreeMap<String, f64> = rows
        .iter()
        .filter(|r| r.applicable)
        .map(|r| (r.id.clone(), if use_amp { r.j_amplitude } else { r.j_complex }.max(floor)))
        .collect();
    let Some(anchor_row) = anchor(rows, anchor_candidates, floor, use_amp) else {
        return LevelOutcome {
            anchor: None,
            admitted: BTreeSet::new(),
            band: 0.0,
            tests: Vec::new(),
            floored,
        };
    };
    let band = pseudo_band * floored[&anchor_row.id];
    let mut admitted = BTreeSet::from([anchor_row.id.clone()]);
    let row_of = |id: &str| rows.iter().find(|r| r.id == id && r.applicable);
    let mut tests = Vec::new();
    let mut order: Vec<&ResidualRow> = rows.iter().filter(|r| r.applicable).collect();
    order.sort_by_key(|r| r.k);
    let mut tested = BTreeSet::new();
    loop {
        let mut changed = false;
        for sup in &order {
            if admitted.contains(&sup.id) || tested.contains(&sup.id) {
                continue;
            }
            let subs: Vec<&ResidualRow> = tree
                .maximal_subgroups(&sup.id)
                .into_iter()
                .filter_map(row_of)
                .filter(|s| s.k >= 2)
                .filter(|s| admitted.contains(&s.id) || floored[&s.id] <= band)
                .collect();
            if !subs.iter().any(|s| admitted.contains(&s.id)) {
                continue;
            }
            tested.insert(sup.id.clone());
            let mut all_pass = true;
            for s in &subs {
                let (jm, jl) = (floored[&sup.id], floored[&s.id]);
                let outcome =
                    ascent_test(jm, jl, sup.k, s.k, sup.n_count, s.n_count).expect("floored residuals are positive");
                all_pass &= outcome.pass;
                tests.push(AscentRecord {
                    level,
                    supergroup: sup.id.clone(),
                    subgroup: s.id.clone(),
                    j_supergroup: jm,
                    j_subgroup: jl,
                    lhs: outcome.lhs,
                    rhs: outcome.rhs,
                    pass: outcome.pass,
                    from_genuine: admitted.contains(&s.id),
                });
            }
            // a subgroup that was tested and failed cannot sit under a genuine supergroup
            let blocked = tree
                .maximal_subgroups(&sup.id)
                .iter()
                .any(|s| tested.contains(*s) && !admitted.contains(*s));
            if all_pass && !blocked {
                admitted.insert(sup.id.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    LevelOutcome {
        anchor: Some(anchor_row.id.clone()),
        admitted,
        band,
        tests,
        floored,
    }
}

fn order_index_plane(id: &str) -> usize {
    plane_groups().iter().position(|g| g.name == id).unwrap_or(usize::MAX)
}

fn order_index_laue(id: &str) -> usize {
    laue_classes().position(|c| c.id == id).unwrap_or(usize::MAX)
}

/// Admitted nodes with no admitted supergroup, restricted to the highest k among them.
fn tops(tree: &HierarchyTree, admitted: &BTreeSet<String>) -> Vec<String> {
    let maximal: Vec<&String> = admitted
        .iter()
        .filter(|a| !admitted.iter().any(|b| b != *a && tree.reachable(a, b)))
        .collect();
    let kmax = maximal.iter().filter_map(|a| tree.k(a)).max().unwrap_or(0);
    let mut out: Vec<String> = maximal
        .into_iter()
        .filter(|a| tree.k(a) == Some(kmax))
        .cloned()
        .collect();
    out.sort_by_key(|a| order_index_plane(a).min(order_index_laue(a)));
    out
}

/// Highest-order applicable plane group compatible with Laue class `laue` whose ascent
/// passes from every applicable maximal subgroup with k >= 2 (lowest residual on ties).
fn laue_preferred(
    tree: &HierarchyTree,
    rows: &[ResidualRow],
    floored: &BTreeMap<String, f64>,
    laue: &str,
) -> Option<(String, Vec<AscentRecord>)> {
    let mut best: Option<(&ResidualRow, Vec<AscentRecord>)> = None;
    for row in rows.iter().filter(|r| r.applicable && r.k >= 2) {
        let g = plane_group(&row.id)?;
        if compatible(g).name != laue {
            continue;
        }
        let mut tests = Vec::new();
        for sub in tree.maximal_subgroups(&row.id) {
            let Some(s) = rows.iter().find(|r| r.id == sub && r.applicable && r.k >= 2) else {
                continue;
            };
            let (jm, jl) = (floored[&row.id], floored[&s.id]);
            let o = ascent_test(jm, jl, row.k, s.k, row.n_count, s.n_count).ok()?;
            tests.push(AscentRecord {
                level: ModelLevel::Plane,
                supergroup: row.id.clone(),
                subgroup: s.id.clone(),
                j_supergroup: jm,
                j_subgroup: jl,
                lhs: o.lhs,
                rhs: o.rhs,
                pass: o.pass,
                from_genuine: false,
            });
        }
        if !tests.iter().all(|t| t.pass) {
            continue;
        }
        let mut memo = BTreeMap::new();
        let subs_sound = tree
            .maximal_subgroups(&row.id)
            .iter()
            .all(|s| sound(tree, rows, floored, s, &mut memo));
        if !subs_sound {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, _)) => row.k > b.k || (row.k == b.k && floored[&row.id] < floored[&b.id]),
        };
        if better {
            best = Some((row, tests));
        }
    }
    best.map(|(r, t)| (r.id.clone(), t))
}

/// True when every node of k >= 4 below and including `id` passes ascent from all of its
/// applicable k >= 2 maximal subgroups.
fn sound(
    tree: &HierarchyTree,
    rows: &[ResidualRow],
    floored: &BTreeMap<String, f64>,
    id: &str,
    memo: &mut BTreeMap<String, bool>,
) -> bool {
    if let Some(&v) = memo.get(id) {
        return v;
    }
    let Some(row) = rows.iter().find(|r| r.id == id) else {
        return true;
    };
    let mut ok = true;
    if row.applicable && row.k >= 4 {
        for sub in tree.maximal_subgroups(id) {
            let Some(s) = rows.iter().find(|r| r.id == sub && r.applicable && r.k >= 2) else {
                continue;
            };
            let pass = ascent_test(floored[&row.id], floored[&s.id], row.k, s.k, row.n_count, s.n_count)
                .is_ok_and(|o| o.pass);
            if !pass || !sound(tree, rows, floored, &s.id, memo) {
                ok = false;
                break;
            }
        }
    }
    memo.insert(id.to_string(), ok);
    ok
}

fn laue_name(id: &str) -> &str {
    point_class(id).map_or(id, |c| c.name)
}

/// Decision pass over a residual table.
pub fn decide(table: &ResidualTable, config: &ClassifyConfig) -> Result<ClassificationResult> {
    if table.plane.iter().all(|r| !r.applicable || r.k < 2) {
        return Err(Error::InvalidParameter("residual table has no k >= 2 plane model".into()));
    }
    let floor = table
        .total_power
        .map_or(1e-300, |p| (config.residual_floor * p).max(1e-300));
    let ptree = plane_edges();
    let ltree = laue_edges();
    let mut warnings = Vec::new();

    let plane_anchor_ids: Vec<&str> = plane_groups()
        .iter()
        .filter(|g| g.k() == 2 || g.k() == 3)
        .map(|g| g.name)
        .collect();
    let plane = climb(&ptree, &table.plane, &plane_anchor_ids, ModelLevel::Plane, floor, config.pseudo_band);
    let anchor_plane = plane.anchor.clone().ok_or(Error::InvalidParameter("no anchor candidate".into()))?;

    let laue_anchor_ids = ["2mm", "2mm(d)", "4", "6"];
    let laue = climb(&ltree, &table.laue, &laue_anchor_ids, ModelLevel::Laue, floor, config.pseudo_band);

    // translation-only detection, only possible when the total power is known
    let mut translation_only = false;
    let mut laue_trivial = laue.anchor.is_none();
    if let Some(p) = table.total_power {
        let k = ptree.k(&anchor_plane).unwrap_or(2) as f64;
        let d = plane.floored[&anchor_plane] / ((1.0 - 1.0 / k) * p);
        if d > config.translation_only_threshold {
            translation_only = true;
            warnings.push(format!(
                "translation-only: the anchoring model {anchor_plane} leaves {:.0}% of the residual expected without any symmetry",
                100.0 * d
            ));
        }
        if let Some(la) = &laue.anchor {
            let k = ltree.k(la).unwrap_or(4) as f64;
            let rayleigh = (4.0 - std::f64::consts::PI) / 4.0;
            let d = laue.floored[la] / ((1.0 - 2.0 / k) * rayleigh * p);
            if d > config.translation_only_threshold {
                laue_trivial = true;
            }
        }
    }

    let mut laue_genuine: String = if laue_trivial {
        "2".to_string()
    } else {
        let t = tops(&ltree, &laue.admitted);
        t.into_iter().next().unwrap_or_else(|| "2".into())
    };

    let plane_admitted: BTreeSet<String> = if translation_only {
        BTreeSet::from(["p1".to_string()])
    } else {
        plane.admitted.clone()
    };
    let plane_tops = if translation_only {
        vec!["p1".to_string()]
    } else {
        tops(&ptree, &plane_admitted)
    };
    let compat_name = |g: &str| compatible(plane_group(g).expect("plane id")).name;
    let mut demoted: BTreeSet<String> = BTreeSet::new();
    let mut conflict: Option<String> = None;
    let mut extra_tests: Vec<AscentRecord> = Vec::new();
    let compatible_tops: Vec<&String> = plane_tops
        .iter()
        .filter(|g| compat_name(g) == laue_name(&laue_genuine))
        .collect();
    let best_plane = if compatible_tops.len() == 1 {
        let best = compatible_tops[0].clone();
        for t in &plane_tops {
            if *t != best {
                demoted.insert(t.clone());
                warnings.push(format!(
                    "{t} ties with {best} in the plane ascent but is incompatible with Laue class {}; labelled pseudosymmetry",
                    laue_name(&laue_genuine)
                ));
            }
        }
        best
    } else {
        let mut candidates: Vec<&String> = plane_admitted
            .iter()
            .filter(|g| compat_name(g) == laue_name(&laue_genuine))
            .collect();
        candidates.sort_by_key(|g| (std::cmp::Reverse(ptree.k(g).unwrap_or(0)), order_index_plane(g)));
        let top_desc = plane_tops.join(", ");
        match candidates.first() {
            Some(best) => {
                let best = (*best).clone();
                for a in &plane_admitted {
                    if ptree.k(a) > ptree.k(&best) || (ptree.k(a) == ptree.k(&best) && *a != best) {
                        demoted.insert(a.clone());
                    }
                }
                conflict = Some(format!(
                    "plane ascent reached {top_desc} but the Laue class is {}; best plane group set to {best}",
                    laue_name(&laue_genuine)
                ));
                best
            }
            None => match laue_preferred(&ptree, &table.plane, &plane.floored, laue_name(&laue_genuine)) {
                Some((best, tests)) => {
                    for a in &plane_admitted {
                        if !ptree.reachable(a, &best) {
                            demoted.insert(a.clone());
                        }
                    }
                    extra_tests = tests;
                    conflict = Some(format!(
                        "plane ascent reached {top_desc} but the Laue class is {}; best plane group set to {best}, the highest Laue-compatible group passing ascent from its maximal subgroups",
                        laue_name(&laue_genuine)
                    ));
                    best
                }
                None => {
                    let best = plane_tops[0].clone();
                    let demoted_laue = compatible(plane_group(&best).unwrap()).id.to_string();
                    conflict = Some(format!(
                        "no applicable plane group is compatible with Laue class {}; Laue class lowered to {} to match {best}",
                        laue_name(&laue_genuine),
                        laue_name(&demoted_laue)
                    ));
                    laue_genuine = demoted_laue;
                    best
                }
            },
        }
    };
    if let Some(c) = &conflict {
        warnings.push(format!("conflict: {c}"));
    }

    let genuine_set: BTreeSet<String> = if best_plane == "p1" {
        BTreeSet::from(["p1".to_string()])
    } else {
        ptree
            .down_closure(&best_plane)
            .into_iter()
            .filter(|g| g != "p1")
            .collect()
    };
    let mut genuine_plane: Vec<String> = genuine_set.iter().cloned().collect();
    genuine_plane.sort_by_key(|g| order_index_plane(g));

    let mut pseudo_plane = Vec::new();
    let mut rejected_plane = Vec::new();
    let mut not_applicable = Vec::new();
    let mut labels = BTreeMap::new();
    for g in plane_groups() {
        let id = g.name.to_string();
        let row = table.plane_row(g.name);
        let label = match row {
            None => continue,
            Some(r) if !r.applicable => Label::NotApplicable,
            Some(_) if genuine_set.contains(&id) => Label::Genuine,
            Some(_) if g.k() == 1 => Label::Trivial,
            Some(_) if demoted.contains(&id) || plane.admitted.contains(&id) => Label::Pseudo,
            Some(_) if plane.floored.get(&id).is_some_and(|&j| j <= plane.band) => Label::Pseudo,
            Some(_) => Label::Rejected,
        };
        match label {
            Label::Pseudo => pseudo_plane.push(id.clone()),
            Label::Rejected => rejected_plane.push(id.clone()),
            Label::NotApplicable => not_applicable.push(id.clone()),
            _ => {}
        }
        labels.insert(id, label);
    }

    let laue_genuine_set: BTreeSet<String> = ltree.down_closure(&laue_genuine);
    let mut laue_pseudo = Vec::new();
    let mut laue_rejected = Vec::new();
    let mut laue_na = Vec::new();
    let mut laue_labels = BTreeMap::new();
    for c in laue_classes() {
        let Some(row) = table.laue_row(c.id) else { continue };
        let label = if !row.applicable {
            Label::NotApplicable
        } else if laue_genuine_set.contains(c.id) {
            Label::Genuine
        } else if laue.admitted.contains(c.id) || laue.floored.get(c.id).is_some_and(|&j| j <= laue.band) {
            Label::Pseudo
        } else {
            Label::Rejected
        };
        match label {
            Label::Pseudo => laue_pseudo.push(c.id.to_string()),
            Label::Rejected => laue_rejected.push(c.id.to_string()),
            Label::NotApplicable => laue_na.push(c.id.to_string()),
            _ => {}
        }
        laue_labels.insert(c.id.to_string(), label);
    }

    let best_row = table.plane_row(&best_plane);
    let noise_eps2 = best_row.and_then(|r| {
        let j = plane.floored.get(&r.id).copied().unwrap_or(r.j_complex);
        noise_estimate(j, r.n_count, r.k).ok()
    });

    let mut confidences = Vec::new();
    for rec in plane.tests.iter().chain(laue.tests.iter()) {
        let genuine = match rec.level {
            ModelLevel::Plane => genuine_set.contains(&rec.supergroup) && genuine_set.contains(&rec.subgroup),
            ModelLevel::Laue => {
                laue_genuine_set.contains(&rec.supergroup) && laue_genuine_set.contains(&rec.subgroup)
            }
        };
        if !genuine || !rec.pass {
            continue;
        }
        let rows = if rec.level == ModelLevel::Plane { &table.plane } else { &table.laue };
        let sup = rows.iter().find(|r| r.id == rec.supergroup).unwrap();
        let sub = rows.iter().find(|r| r.id == rec.subgroup).unwrap();
        if let Ok(c) = confidence_level(rec.lhs, sup.k, sub.k, sup.n_count, sub.n_count) {
            confidences.push(ConfidenceEntry {
                level: rec.level,
                supergroup: rec.supergroup.clone(),
                subgroup: rec.subgroup.clone(),
                ratio: rec.lhs,
                confidence: c,
            });
        }
    }

    let entry = |r: &ResidualRow, label: Label, plane_level: bool| ResidualEntry {
        group: r.id.clone(),
        k: r.k,
        n: r.n_count,
        j_complex: (r.applicable && plane_level).then_some(r.j_complex),
        j_amplitude: r.applicable.then_some(r.j_amplitude),
        gaic: match (r.applicable && plane_level, noise_eps2) {
            (true, Some(e)) => Some(gaic_value(r.j_complex, r.n_count, r.k, e)),
            _ => None,
        },
        label,
        origin: r.origin,
        phase_residual: r.phase_residual,
    };
    let residuals = table
        .plane
        .iter()
        .map(|r| entry(r, labels.get(&r.id).copied().unwrap_or(Label::Rejected), true))
        .collect();
    let laue_residuals = table
        .laue
        .iter()
        .map(|r| entry(r, laue_labels.get(&r.id).copied().unwrap_or(Label::Rejected), false))
        .collect();

    let mut ascent_tests = plane.tests;
    for t in extra_tests {
        if !ascent_tests.iter().any(|a| a.supergroup == t.supergroup && a.subgroup == t.subgroup) {
            ascent_tests.push(t);
        }
    }
    ascent_tests.extend(laue.tests);

    Ok(ClassificationResult {
        anchor_plane,
        best_plane,
        genuine_plane,
        pseudo_plane,
        rejected_plane,
        not_applicable,
        anchor_laue: laue.anchor,
        genuine_laue: laue_genuine,
        pseudo_laue: laue_pseudo,
        rejected_laue: laue_rejected,
        not_applicable_laue: laue_na,
        consistency: Consistency {
            status: if conflict.is_some() {
                ConsistencyStatus::Conflict
            } else {
                ConsistencyStatus::Consistent
            },
            description: conflict,
        },
        translation_only,
        noise_eps2,
        confidences,
        residuals,
        laue_residuals,
        ascent_tests,
        warnings,
        config: *config,
    })
}

fn row_from_fit(fit: &ModelFit) -> ResidualRow {
    let mut r = ResidualRow::new(&fit.id, fit.k, fit.n_count(), fit.j_complex, fit.j_amplitude);
    r.origin = fit.origin.map(|o| o.shift);
    r.phase_residual = fit.origin.map(|o| o.phase_residual);
    r
}

/// Fits every registered plane and Laue model to `trans`.
pub fn fit_models(trans: &CoefficientSet, config: &ClassifyConfig) -> Result<ResidualTable> {
    if trans.is_empty() {
        return Err(Error::EmptyCoefficientSet);
    }
    let reg = registry();
    let fit_level = |level: ModelLevel| -> Result<Vec<ResidualRow>> {
        let models: Vec<_> = reg.level(level).collect();
        models
            .par_iter()
            .map(|m| match m.fit(trans, &config.metric) {
                Ok(fit) => Ok(row_from_fit(&fit)),
                Err(Error::MetricMismatch { .. }) => Ok(ResidualRow::not_applicable(m.id(), m.order())),
                Err(e) => Err(e),
            })
            .collect()
    };
    let plane = fit_level(ModelLevel::Plane)?;
    let laue = fit_level(ModelLevel::Laue)?;
    Ok(ResidualTable {
        plane,
        laue,
        total_power: Some(trans.power()),
    })
}

/// Full classification of a translation-averaged coefficient set.
pub fn classify(trans: &CoefficientSet, config: &ClassifyConfig) -> Result<ClassificationResult> {
    let table = fit_models(trans, config)?;
    let result = decide(&table, config)?;
    log::debug!(
        "classified N = {}: best {}, genuine {:?}, Laue {}",
        trans.n_count(),
        result.best_plane,
        result.genuine_plane,
        result.genuine_laue
    );
    Ok(result)
}

/// Residual table from externally symmetrized models (one set per setting), as produced by
/// other processing programs. Models are compared on the indices of `trans`.
pub fn table_from_models(trans: &CoefficientSet, models: &[(String, CoefficientSet)]) -> Result<ResidualTable> {
    use crate::gaic::{residual_amplitude, residual_complex};
    let mut rows = Vec::new();
    for g in plane_groups() {
        if g.name == "p1" {
            rows.push(ResidualRow::new("p1", 1, trans.n_count(), 0.0, 0.0));
            continue;
        }
        match models.iter().find(|(id, _)| plane_group(id).map(|p| p.name) == Some(g.name)) {
            Some((_, model)) => {
                let mut m = model.clone();
                // absent indices of the model: trans indices the group extinguishes
                let absent = trans
                    .iter()
                    .map(|(i, _)| i)
                    .filter(|i| !m.contains(i.0, i.1) && g.is_absent(*i))
                    .collect();
                m = m.with_coefficients(m.map().clone(), absent);
                let mut scaled = m.clone();
                scaled.unit = trans.unit;
                rows.push(ResidualRow::new(
                    g.name,
                    g.k(),
                    model.n_count(),
                    residual_complex(trans, &scaled)?,
                    residual_amplitude(trans, &scaled)?,
                ));
            }
            None => rows.push(ResidualRow::not_applicable(g.name, g.k())),
        }
    }
    Ok(ResidualTable::with_laue_from_plane(rows, Some(trans.power())))
}
