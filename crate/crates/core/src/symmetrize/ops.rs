use serde::{Deserialize, Serialize};

use crate::lattice_fourier::{DirectBasis, Index};

/// Integer 2x2 matrix acting on fractional column vectors.
pub type IMat = [[i32; 2]; 2];

pub const IDENTITY: IMat = [[1, 0], [0, 1]];

pub fn mat_mul(a: IMat, b: IMat) -> IMat {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det(a: IMat) -> i32 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(a: IMat) -> IMat {
    let d = det(a);
    debug_assert!(d == 1 || d == -1);
    [[a[1][1] * d, -a[0][1] * d], [-a[1][0] * d, a[0][0] * d]]
}

/// Row action h -> h M on Laue indices.
pub fn act(h: Index, m: IMat) -> Index {
    (h.0 * m[0][0] + h.1 * m[1][0], h.0 * m[0][1] + h.1 * m[1][1])
}

/// A symmetry operation x -> R x + t in fractional coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operation {
    pub r: IMat,
    pub t: [f64; 2],
}

pub(crate) fn wrap01(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    if (1.0 - y).abs() < 1e-12 {
        0.0
    } else {
        y
    }
}

impl Operation {
    pub const fn new(r: IMat, t: [f64; 2]) -> Self {
        Self { r, t }
    }

    pub const fn linear(r: IMat) -> Self {
        Self { r, t: [0.0, 0.0] }
    }

    pub fn apply_point(&self, x: [f64; 2]) -> [f64; 2] {
        let r = self.r;
        [
            r[0][0] as f64 * x[0] + r[0][1] as f64 * x[1] + self.t[0],
            r[1][0] as f64 * x[0] + r[1][1] as f64 * x[1] + self.t[1],
        ]
    }

    pub fn apply_index(&self, h: Index) -> Index {
        act(h, self.r)
    }

    /// h . t in cycles.
    pub fn index_phase(&self, h: Index) -> f64 {
        h.0 as f64 * self.t[0] + h.1 as f64 * self.t[1]
    }

    /// self after other: x -> R1 (R2 x + t2) + t1, translation reduced mod 1.
    pub fn compose(&self, other: &Operation) -> Operation {
        let t = self.apply_point(other.t);
        Operation {
            r: mat_mul(self.r, other.r),
            t: [wrap01(t[0]), wrap01(t[1])],
        }
    }

    pub fn inverse(&self) -> Operation {
        let ri = unimodular_inverse(self.r);
        let inv = Operation::linear(ri);
        let t = inv.apply_point(self.t);
        Operation {
            r: ri,
            t: [wrap01(-t[0]), wrap01(-t[1])],
        }
    }

    /// Same operation expressed in the basis D = D' U^-1, given it is defined in D'.
    pub fn conjugated(&self, u: IMat) -> Operation {
        let ui = unimodular_inverse(u);
        let r = mat_mul(mat_mul(u, self.r), ui);
        let t = Operation::linear(u).apply_point(self.t);
        Operation {
            r,
            t: [wrap01(t[0]), wrap01(t[1])],
        }
    }

    /// Equal modulo lattice translations.
    pub fn same_mod_lattice(&self, other: &Operation) -> bool {
        let close = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(1.0);
            !(1e-9..=1.0 - 1e-9).contains(&d)
        };
        self.r == other.r && close(self.t[0], other.t[0]) && close(self.t[1], other.t[1])
    }
}

/// Bravais-type requirement of a symmetry model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    Oblique,
    Rectangular,
    Rhombic,
    Square,
    Hexagonal,
}

/// Metric tolerances for lattice-type gating (relative length, degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTolerances {
    pub hex_length: f64,
    pub hex_angle_deg: f64,
    pub square_length: f64,
    pub square_angle_deg: f64,
    pub rect_length: f64,
    pub rect_angle_deg: f64,
}

impl Default for MetricTolerances {
    fn default() -> Self {
        Self {
            hex_length: 0.02,
            hex_angle_deg: 2.0,
            square_length: 0.01,
            square_angle_deg: 1.0,
            rect_length: 0.01,
            rect_angle_deg: 1.0,
        }
    }
}

fn unimodular_candidates() -> Vec<IMat> {
    let mut out = vec![IDENTITY];
    let vals = [0, 1, -1];
    let mut rest = Vec::new();
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                for &d in &vals {
                    let m = [[a, b], [c, d]];
                    if det(m).abs() == 1 && m != IDENTITY {
                        rest.push(m);
                    }
                }
            }
        }
    }
    rest.sort_by_key(|m| m.iter().flatten().map(|v| v.abs()).sum::<i32>());
    out.extend(rest);
    out
}

impl LatticeKind {
    fn accepts(self, d: &DirectBasis, tol: &MetricTolerances) -> bool {
        let (la, lb) = d.lengths();
        let len_dev = (la - lb).abs() / la.max(lb);
        let g = d.gamma_deg();
        match self {
            LatticeKind::Oblique => true,
            LatticeKind::Rectangular => (g - 90.0).abs() <= tol.rect_angle_deg,
            LatticeKind::Rhombic => len_dev <= tol.rect_length,
            LatticeKind::Square => len_dev <= tol.square_length && (g - 90.0).abs() <= tol.square_angle_deg,
            LatticeKind::Hexagonal => len_dev <= tol.hex_length && (g - 120.0).abs() <= tol.hex_angle_deg,
        }
    }

    /// Unimodular U such that the cell D U has this lattice type, identity preferred.
    pub fn setting_transform(self, d: &DirectBasis, tol: &MetricTolerances) -> Option<IMat> {
        if self == LatticeKind::Oblique {
            return Some(IDENTITY);
        }
        unimodular_candidates()
            .into_iter()
            .find(|&u| self.accepts(&d.transformed(u), tol))
    }
}
