use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::{wrap01, Operation};
use super::project::ShiftObjective;
use crate::lattice_fourier::{CoefficientSet, Index};

/// Origin shift applied as F(h) -> F(h) exp(-2 pi i h.s) before symmetrization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginShift {
    pub shift: [f64; 2],
    /// Amplitude-weighted RMS phase deviation from the symmetrized model, radians.
    pub phase_residual: f64,
}

const GRID: usize = 64;
const COARSE_COEFFS: usize = 256;
const TIE: f64 = 1e-9;

fn strongest(set: &CoefficientSet, n: usize) -> BTreeMap<Index, Complex64> {
    let mut all: Vec<(Index, Complex64)> = set.iter().collect();
    all.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()).then(a.0.cmp(&b.0)));
    all.truncate(n);
    all.into_iter().collect()
}

/// Minimizes the projection residual ||F_s - P F_s||^2 over s: a 64 x 64 grid on the
/// strongest coefficients, then a step-halving pattern search on all of them.
/// Near-ties resolve to the lexicographically smallest shift.
pub(crate) fn refine_origin_with_ops(set: &CoefficientSet, ops: &[Operation]) -> OriginShift {
    if ops.len() <= 1 || set.is_empty() {
        return OriginShift {
            shift: [0.0, 0.0],
            phase_residual: 0.0,
        };
    }
    let coarse = ShiftObjective::new(&strongest(set, COARSE_COEFFS), ops);
    let scale = coarse.power().max(1e-300);
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..GRID {
        for j in 0..GRID {
            let s = [i as f64 / GRID as f64, j as f64 / GRID as f64];
            let r = coarse.residual(s) / scale;
            if r < best.1 - TIE {
                best = (s, r);
            }
        }
    }
    let full = ShiftObjective::new(set.map(), ops);
    let fscale = full.power().max(1e-300);
    let mut s = best.0;
    let mut cur = full.residual(s) / fscale;
    let mut step = 1.0 / GRID as f64;
    while step > 1e-7 {
        let mut moved = None;
        for (di, dj) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
            let cand = [s[0] + di as f64 * step, s[1] + dj as f64 * step];
            let r = full.residual(cand) / fscale;
            if r < cur - TIE * 1e-3 && moved.is_none_or(|(_, b)| r < b) {
                moved = Some((cand, r));
            }
        }
        match moved {
            Some((cand, r)) => {
                s = cand;
                cur = r;
            }
            None => step /= 2.0,
        }
    }
    let shift = [wrap01(s[0]), wrap01(s[1])];
    OriginShift {
        shift,
        phase_residual: full.phase_residual(shift),
    }
}
