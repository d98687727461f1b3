use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::f64::consts::PI;

use num_complex::Complex64;

use super::groups::absent_under;
use super::ops::{act, IMat, Operation};
use crate::lattice_fourier::Index;

/// Orbit of a representative h: one entry (h R_g, h.t_g) per operation g.
#[derive(Debug, Clone)]
pub(crate) struct Orbit {
    pub entries: Vec<(Index, f64)>,
    pub absent: bool,
}

pub(crate) fn plane_orbits<'a>(keys: impl Iterator<Item = &'a Index>, ops: &[Operation]) -> Vec<Orbit> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &h in keys {
        if seen.contains(&h) {
            continue;
        }
        let entries: Vec<(Index, f64)> = ops.iter().map(|o| (o.apply_index(h), o.index_phase(h))).collect();
        for (m, _) in &entries {
            seen.insert(*m);
        }
        out.push(Orbit {
            entries,
            absent: absent_under(ops, h),
        });
    }
    out
}

pub(crate) fn point_orbits<'a>(keys: impl Iterator<Item = &'a Index>, mats: &[IMat]) -> Vec<Orbit> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &h in keys {
        if seen.contains(&h) {
            continue;
        }
        let entries: Vec<(Index, f64)> = mats.iter().map(|&r| (act(h, r), 0.0)).collect();
        for (m, _) in &entries {
            seen.insert(*m);
        }
        out.push(Orbit { entries, absent: false });
    }
    out
}

fn cis(cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * cycles)
}

/// Orbit-mean projection. Members missing from the map are left out of the mean.
pub(crate) fn project(
    map: &BTreeMap<Index, Complex64>,
    orbits: &[Orbit],
) -> (BTreeMap<Index, Complex64>, BTreeSet<Index>) {
    let mut out = BTreeMap::new();
    let mut absent = BTreeSet::new();
    for orbit in orbits {
        if orbit.absent {
            for (m, _) in &orbit.entries {
                if map.contains_key(m) {
                    absent.insert(*m);
                }
            }
            continue;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut n = 0usize;
        for (m, phi) in &orbit.entries {
            if let Some(v) = map.get(m) {
                sum += v * cis(-phi);
                n += 1;
            }
        }
        if n == 0 {
            continue;
        }
        let est = sum / n as f64;
        for (m, phi) in &orbit.entries {
            if map.contains_key(m) {
                out.entry(*m).or_insert(est * cis(*phi));
            }
        }
    }
    (out, absent)
}

/// Amplitude orbit mean; phases of each member are kept.
pub(crate) fn project_amplitudes(map: &BTreeMap<Index, Complex64>, orbits: &[Orbit]) -> BTreeMap<Index, Complex64> {
    let mut out = BTreeMap::new();
    for orbit in orbits {
        let present: Vec<f64> = orbit.entries.iter().filter_map(|(m, _)| map.get(m).map(|v| v.norm())).collect();
        if present.is_empty() {
            continue;
        }
        let mean = present.iter().sum::<f64>() / present.len() as f64;
        for (m, _) in &orbit.entries {
            if let Some(v) = map.get(m) {
                let phase = if v.norm() > 0.0 { v.arg() } else { 0.0 };
                out.entry(*m).or_insert(Complex64::from_polar(mean, phase));
            }
        }
    }
    out
}

struct PreparedOrbit {
    entries: Vec<(usize, f64)>,
    distinct: Vec<(usize, f64)>,
}

/// Coefficients and orbit structure laid out for repeated residual evaluation under shifts.
pub(crate) struct ShiftObjective {
    idx: Vec<Index>,
    vals: Vec<Complex64>,
    orbits: Vec<PreparedOrbit>,
    absent_power: f64,
}

impl ShiftObjective {
    pub fn new(map: &BTreeMap<Index, Complex64>, ops: &[Operation]) -> Self {
        let idx: Vec<Index> = map.keys().copied().collect();
        let vals: Vec<Complex64> = map.values().copied().collect();
        let pos: HashMap<Index, usize> = idx.iter().enumerate().map(|(i, h)| (*h, i)).collect();
        let mut orbits = Vec::new();
        let mut absent_power = 0.0;
        for orbit in plane_orbits(idx.iter(), ops) {
            if orbit.absent {
                for m in orbit.entries.iter().map(|(m, _)| m).collect::<BTreeSet<_>>() {
                    if let Some(&p) = pos.get(m) {
                        absent_power += vals[p].norm_sqr();
                    }
                }
                continue;
            }
            let entries: Vec<(usize, f64)> = orbit
                .entries
                .iter()
                .filter_map(|(m, phi)| pos.get(m).map(|&p| (p, *phi)))
                .collect();
            let mut distinct: Vec<(usize, f64)> = Vec::new();
            for &(p, phi) in &entries {
                if !distinct.iter().any(|(q, _)| *q == p) {
                    distinct.push((p, phi));
                }
            }
            orbits.push(PreparedOrbit { entries, distinct });
        }
        Self {
            idx,
            vals,
            orbits,
            absent_power,
        }
    }

    fn shifted(&self, s: [f64; 2]) -> Vec<Complex64> {
        self.idx
            .iter()
            .zip(&self.vals)
            .map(|(h, v)| v * cis(-(h.0 as f64 * s[0] + h.1 as f64 * s[1])))
            .collect()
    }

    /// ||F_s - P F_s||^2 on the stored scale.
    pub fn residual(&self, s: [f64; 2]) -> f64 {
        let v = self.shifted(s);
        let mut total = self.absent_power;
        for o in &self.orbits {
            let mut sum = Complex64::new(0.0, 0.0);
            for &(p, phi) in &o.entries {
                sum += v[p] * cis(-phi);
            }
            let est = sum / o.entries.len() as f64;
            for &(p, phi) in &o.distinct {
                total += (v[p] - est * cis(phi)).norm_sqr();
            }
        }
        total
    }

    /// Amplitude-weighted RMS phase difference between F_s and its projection (radians).
    pub fn phase_residual(&self, s: [f64; 2]) -> f64 {
        let v = self.shifted(s);
        let (mut num, mut den) = (0.0, 0.0);
        for o in &self.orbits {
            let mut sum = Complex64::new(0.0, 0.0);
            for &(p, phi) in &o.entries {
                sum += v[p] * cis(-phi);
            }
            let est = sum / o.entries.len() as f64;
            for &(p, phi) in &o.distinct {
                let model = est * cis(phi);
                let w = v[p].norm();
                if w > 0.0 && model.norm() > 0.0 {
                    let d = (v[p] / model).arg();
                    num += w * d * d;
                    den += w;
                }
            }
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            0.0
        }
    }

    pub fn power(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum()
    }
}
