//! Property tests for the module invariants.

use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;

use planesym::gaic::{ascent_rhs, confidence_level, gaic_value, residual_complex};
use planesym::hierarchy::{compatible, decide, plane_edges, ClassifyConfig, ConsistencyStatus, ResidualRow, ResidualTable};
use planesym::image_io::{compute_histogram, format_hka, parse_hka_str, HkaRecord, RasterImage, RegionSelection};
use planesym::lattice_fourier::CoefficientSet;
use planesym::symmetrize::{plane_group, plane_groups, symmetrize_plane_group};

fn coefficient_set() -> impl Strategy<Value = CoefficientSet> {
    prop::collection::vec(((-5i32..=5, -5i32..=5), 0.1f64..100.0, -3.2f64..3.2), 1..40).prop_map(|raw| {
        let mut map = BTreeMap::new();
        for ((h, k), a, p) in raw {
            if (h, k) == (0, 0) {
                continue;
            }
            let c = Complex64::from_polar(a, p);
            map.insert((h, k), c);
            map.insert((-h, -k), c.conj());
        }
        if map.is_empty() {
            map.insert((1, 0), Complex64::new(1.0, 0.0));
            map.insert((-1, 0), Complex64::new(1.0, 0.0));
        }
        CoefficientSet::from_map(map)
    })
}

fn max_diff(a: &CoefficientSet, b: &CoefficientSet) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, c) in a.iter() {
        let d = b.get(i.0, i.1).map_or(c.norm(), |o| (c - o).norm());
        worst = worst.max(d);
    }
    for (i, c) in b.iter() {
        if a.get(i.0, i.1).is_none() {
            worst = worst.max(c.norm());
        }
    }
    worst
}

/// Plane-tree edges whose operations are nested in the unreduced setting.
fn nested_edges() -> Vec<(&'static str, &'static str)> {
    let tree = plane_edges();
    tree.edges
        .iter()
        .filter_map(|e| {
            let (sup, sub) = (plane_group(&e.sup)?, plane_group(&e.sub)?);
            sup.contains_group(sub).then_some((sup.name, sub.name))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn histogram_matches_brute_force(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
        let mut s = seed;
        let pixels: Vec<f64> = (0..w * h)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) % 256) as f64
            })
            .collect();
        let img = RasterImage::new(w, h, pixels.clone()).unwrap();
        let hist = compute_histogram(&img, None).unwrap();
        let n = pixels.len() as f64;
        let mean = pixels.iter().sum::<f64>() / n;
        let rms = (pixels.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let (min, max) = pixels.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        prop_assert_eq!(hist.bins.iter().sum::<u64>(), pixels.len() as u64);
        prop_assert!(hist.min <= hist.mean && hist.mean <= hist.max);
        prop_assert_eq!((hist.min, hist.max), (min, max));
        prop_assert_eq!(hist.fwid, max - min);
        prop_assert!((hist.mean - mean).abs() < 1e-9);
        prop_assert!((hist.rms - rms).abs() < 1e-9);
        prop_assert!(hist.rms >= hist.mad && hist.mad >= 0.0);
    }

    #[test]
    fn disk_count_matches_enumeration(w in 4usize..60, h in 4usize..60, fx in 0.0f64..1.0, fy in 0.0f64..1.0, fr in 0.0f64..1.0) {
        let cx = fx * (w - 1) as f64;
        let cy = fy * (h - 1) as f64;
        let rmax = [cx + 0.5, cy + 0.5, w as f64 - 0.5 - cx, h as f64 - 0.5 - cy]
            .into_iter()
            .fold(f64::MAX, f64::min);
        let r = fr * rmax;
        let region = RegionSelection::disk(w, h, (cx, cy), r);
        let mut count = 0;
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                count += (dx * dx + dy * dy <= r * r) as usize;
            }
        }
        match region {
            Ok(reg) => prop_assert_eq!(reg.pixel_count(), count),
            Err(_) => prop_assert_eq!(count, 0),
        }
    }

    #[test]
    fn hka_write_parse_roundtrip(recs in prop::collection::btree_map((-30i32..30, -30i32..30), (0.0f64..10000.0, -180.0f64..180.0), 1..200)) {
        let records: Vec<HkaRecord> = recs
            .into_iter()
            .map(|((h, k), (amplitude, phase))| HkaRecord { h, k, amplitude, phase })
            .collect();
        let back = parse_hka_str(&format_hka(&records)).unwrap();
        prop_assert_eq!(back.len(), records.len());
        for (a, b) in records.iter().zip(&back) {
            prop_assert_eq!((a.h, a.k), (b.h, b.k));
            prop_assert!((a.amplitude - b.amplitude).abs() <= 1e-4);
            let d = (a.phase - b.phase).rem_euclid(360.0);
            prop_assert!(d.min(360.0 - d) <= 1e-4, "{} vs {}", a.phase, b.phase);
            prop_assert!((0.0..360.0).contains(&b.phase));
        }
    }

    #[test]
    fn symmetrization_is_idempotent(set in coefficient_set()) {
        for g in plane_groups() {
            let Ok(once) = symmetrize_plane_group(&set, g) else { continue };
            let twice = symmetrize_plane_group(&once, g).unwrap();
            prop_assert!(max_diff(&once, &twice) < 1e-9, "{}", g.name);
        }
    }

    #[test]
    fn supergroup_symmetric_sets_are_subgroup_fixed_points(set in coefficient_set()) {
        for (sup, sub) in nested_edges() {
            let Ok(exact) = symmetrize_plane_group(&set, plane_group(sup).unwrap()) else { continue };
            let again = symmetrize_plane_group(&exact, plane_group(sub).unwrap()).unwrap();
            prop_assert!(max_diff(&exact, &again) < 1e-9, "{sup} over {sub}");
        }
    }

    #[test]
    fn residual_grows_along_edges_on_a_shared_index_set(set in coefficient_set()) {
        for (sup, sub) in nested_edges() {
            let (Ok(m), Ok(l)) = (
                symmetrize_plane_group(&set, plane_group(sup).unwrap()),
                symmetrize_plane_group(&set, plane_group(sub).unwrap()),
            ) else { continue };
            let (jm, jl) = (residual_complex(&set, &m).unwrap(), residual_complex(&set, &l).unwrap());
            prop_assert!(jl >= 0.0 && jm >= jl - 1e-9 * (1.0 + jl), "{sup} {jm} < {sub} {jl}");
        }
    }

    #[test]
    fn gaic_is_affine_in_noise(j in 0.0f64..10.0, n in 1usize..2000, eps2 in 0.0f64..1.0) {
        for k in [1, 2, 3, 4, 6, 8, 12] {
            prop_assert_eq!(gaic_value(j, n, k, 0.0), j);
            let slope = 2.0 * n as f64 / k as f64;
            prop_assert!((gaic_value(j, n, k, eps2) - (j + slope * eps2)).abs() < 1e-9 * (1.0 + slope));
        }
    }

    #[test]
    fn confidence_midpoint_is_inside(nm in 200usize..1000, dn in 0usize..40) {
        for (km, kl) in [(4, 2), (6, 3), (8, 4), (12, 6), (6, 2), (12, 4)] {
            let nl = nm + dn;
            let rhs = ascent_rhs(km, kl, nm, nl).unwrap();
            let c = confidence_level(0.5 * (1.0 + rhs), km, kl, nm, nl).unwrap();
            prop_assert!(c > 0.0 && c < 1.0);
        }
    }

    #[test]
    fn decision_postconditions(scales in prop::collection::vec(0.0f64..6.0, 21), n in 100usize..1000) {
        // residuals grow along every edge, as they do for real symmetrizations
        let tree = plane_edges();
        let mut groups: Vec<_> = plane_groups().iter().zip(&scales).collect();
        groups.sort_by_key(|(g, _)| g.k());
        let mut j: BTreeMap<&str, f64> = BTreeMap::new();
        for (g, s) in &groups {
            let below = tree
                .maximal_subgroups(g.name)
                .iter()
                .filter_map(|sub| j.get(&**sub).copied())
                .fold(0.0, f64::max);
            j.insert(g.name, if g.name == "p1" { 0.0 } else { below + 10f64.powf(**s - 4.0) });
        }
        let plane: Vec<ResidualRow> = plane_groups()
            .iter()
            .map(|g| {
                let jg = j[g.name];
                if g.name == "p1" {
                    ResidualRow::new("p1", 1, n, 0.0, 0.0)
                } else {
                    ResidualRow::new(g.name, g.k(), n - g.k(), jg, if g.name == "p2" { 0.0 } else { jg / 3.0 })
                }
            })
            .collect();
        let table = ResidualTable::with_laue_from_plane(plane, None);
        let cfg = ClassifyConfig::default();
        let r = decide(&table, &cfg).unwrap();
        if r.best_plane != "p1" {
            prop_assert!(r.genuine_plane.contains(&r.best_plane));
        }
        prop_assert!(r.genuine_plane.iter().all(|g| !r.pseudo_plane.contains(g)));
        prop_assert_eq!(compatible(plane_group(&r.best_plane).unwrap()).id, r.genuine_laue.as_str());
        if r.consistency.status == ConsistencyStatus::Conflict {
            prop_assert!(r.consistency.description.is_some());
        }
        // upward closure: every genuine node above the anchor has a passed edge from a genuine node
        for g in r.genuine_plane.iter().filter(|g| **g != r.anchor_plane && g.as_str() != "p1") {
            let k = plane_group(g).unwrap().k();
            if k <= 3 {
                continue;
            }
            prop_assert!(
                r.ascent_tests.iter().any(|t| &t.supergroup == g && t.pass && r.genuine_plane.contains(&t.subgroup)),
                "{} has no passed inbound edge", g
            );
        }
        let again = decide(&table, &cfg).unwrap();
        prop_assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
    }
}
