use serde::{Deserialize, Serialize};

use super::spectral::SpectralMap;
use crate::error::{Error, Result};

/// Reciprocal basis in frequency bins of an M x M window (`grid` = M).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalBasis {
    pub a_star: [f64; 2],
    pub b_star: [f64; 2],
    /// Position of DC in the centred map.
    pub origin: [f64; 2],
    pub fit_rms: f64,
    pub grid: usize,
}

/// Direct-space cell in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectBasis {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl DirectBasis {
    pub fn lengths(&self) -> (f64, f64) {
        (norm(self.a), norm(self.b))
    }

    /// Interaxial angle in degrees.
    pub fn gamma_deg(&self) -> f64 {
        let (la, lb) = self.lengths();
        (dot(self.a, self.b) / (la * lb)).clamp(-1.0, 1.0).acos().to_degrees()
    }

    pub fn area(&self) -> f64 {
        cross(self.a, self.b).abs()
    }

    /// Basis in the setting D' = D U (columns).
    pub fn transformed(&self, u: [[i32; 2]; 2]) -> DirectBasis {
        let f = |c: usize| {
            [
                u[0][c] as f64 * self.a[0] + u[1][c] as f64 * self.b[0],
                u[0][c] as f64 * self.a[1] + u[1][c] as f64 * self.b[1],
            ]
        };
        DirectBasis { a: f(0), b: f(1) }
    }
}

pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: [f64; 2]) -> f64 {
    dot(a, a).sqrt()
}

impl ReciprocalBasis {
    pub fn new(a_star: [f64; 2], b_star: [f64; 2], grid: usize) -> Result<Self> {
        if grid == 0 || cross(a_star, b_star).abs() < 1e-12 {
            return Err(Error::InvalidParameter("degenerate reciprocal basis".into()));
        }
        Ok(Self {
            a_star,
            b_star,
            origin: [(grid / 2) as f64, (grid / 2) as f64],
            fit_rms: 0.0,
            grid,
        })
    }

    /// Frequency (in bins) of reflection (h, k).
    pub fn q(&self, h: i32, k: i32) -> [f64; 2] {
        let (h, k) = (h as f64, k as f64);
        [
            h * self.a_star[0] + k * self.b_star[0],
            h * self.a_star[1] + k * self.b_star[1],
        ]
    }

    pub fn direct(&self) -> DirectBasis {
        let m = self.grid as f64;
        let [a1, a2] = self.a_star;
        let [b1, b2] = self.b_star;
        let det = a1 * b2 - a2 * b1;
        DirectBasis {
            a: [m * b2 / det, -m * b1 / det],
            b: [-m * a2 / det, m * a1 / det],
        }
    }

    pub fn from_direct(direct: DirectBasis, grid: usize) -> Result<Self> {
        let m = grid as f64;
        let det = cross(direct.a, direct.b);
        if det.abs() < 1e-12 {
            return Err(Error::InvalidParameter("degenerate direct basis".into()));
        }
        let a_star = [m * direct.b[1] / det, -m * direct.b[0] / det];
        let b_star = [-m * direct.a[1] / det, m * direct.a[0] / det];
        Self::new(a_star, b_star, grid)
    }

    /// Fractional cell coordinates of a pixel offset from the window origin.
    pub fn fractional(&self, dx: f64, dy: f64) -> [f64; 2] {
        let m = self.grid as f64;
        [
            (self.a_star[0] * dx + self.a_star[1] * dy) / m,
            (self.b_star[0] * dx + self.b_star[1] * dy) / m,
        ]
    }

    /// Unit-cell area in pixels.
    pub fn cell_area(&self) -> f64 {
        self.direct().area()
    }

    /// Reduces the direct cell (|a| <= |b|, gamma in [90, 120] degrees).
    /// Returns the reduced basis and U with D' = D U, so indices map as h' = h U.
    pub fn reduced(&self) -> (ReciprocalBasis, [[i32; 2]; 2]) {
        let d = self.direct();
        let (mut a, mut b) = (d.a, d.b);
        let mut u = [[1i32, 0], [0, 1]];
        // columns of u track a and b in terms of the original basis
        for _ in 0..100 {
            if dot(a, a) > dot(b, b) {
                std::mem::swap(&mut a, &mut b);
                for row in u.iter_mut() {
                    row.swap(0, 1);
                }
            }
            let mu = (dot(a, b) / dot(a, a)).round();
            if mu == 0.0 {
                break;
            }
            b = [b[0] - mu * a[0], b[1] - mu * a[1]];
            let mi = mu as i32;
            for row in u.iter_mut() {
                row[1] -= mi * row[0];
            }
        }
        if dot(a, b) > 1e-12 * dot(a, a) {
            b = [-b[0], -b[1]];
            for row in u.iter_mut() {
                row[1] = -row[1];
            }
        }
        let mut out = ReciprocalBasis::from_direct(DirectBasis { a, b }, self.grid)
            .expect("reduction preserves non-degeneracy");
        out.fit_rms = self.fit_rms;
        out.origin = self.origin;
        (out, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub pos: [f64; 2],
    pub amplitude: f64,
}

/// Peak search and lattice fit with diagnostics.
#[derive(Debug, Clone)]
pub struct LatticeFit {
    pub basis: ReciprocalBasis,
    pub peaks: Vec<Peak>,
    pub indexed: usize,
    pub unindexed: Vec<Peak>,
}

const DC_EXCLUSION: f64 = 1.5;
const MAX_PEAKS: usize = 80;
const INDEX_TOL: f64 = 0.15;
const SIGNIFICANT: f64 = 0.02;
const SIDELOBE_RADIUS: f64 = 6.5;
const SIDELOBE_RATIO: f64 = 0.1;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Local maxima of |C| in the upper half plane, refined by centre of mass.
pub fn detect_peaks(map: &SpectralMap, min_peak_snr: f64) -> Vec<Peak> {
    let m = map.size() as i64;
    let half = m / 2;
    let amp = |u: i64, v: i64| map.at(u, v).norm();
    let background = median(map.amplitudes());
    let mut strongest = 0.0f64;
    for ((u, v), c) in map.iter() {
        if ((u * u + v * v) as f64).sqrt() >= DC_EXCLUSION {
            strongest = strongest.max(c.norm());
        }
    }
    let threshold = (min_peak_snr * background).max(1e-6 * strongest);
    let mut peaks = Vec::new();
    for v in 0..half {
        for u in -half..half {
            if v == 0 && u <= 0 {
                continue;
            }
            if (((u * u + v * v) as f64).sqrt()) < DC_EXCLUSION {
                continue;
            }
            let a = amp(u, v);
            if a <= threshold || a <= 0.0 {
                continue;
            }
            let mut is_max = true;
            'n: for dv in -1..=1 {
                for du in -1..=1 {
                    if du == 0 && dv == 0 {
                        continue;
                    }
                    let b = amp(u + du, v + dv);
                    let earlier = dv < 0 || (dv == 0 && du < 0);
                    if b > a || (earlier && b == a) {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if !is_max {
                continue;
            }
            let (mut su, mut sv, mut sw) = (0.0, 0.0, 0.0);
            for dv in -1..=1 {
                for du in -1..=1 {
                    let w = amp(u + du, v + dv).powi(2);
                    su += w * du as f64;
                    sv += w * dv as f64;
                    sw += w;
                }
            }
            peaks.push(Peak {
                pos: [u as f64 + su / sw, v as f64 + sv / sw],
                amplitude: a,
            });
        }
    }
    peaks.sort_by(|p, q| q.amplitude.total_cmp(&p.amplitude).then(p.pos[0].total_cmp(&q.pos[0])));
    // aperture sidelobes: weak maxima ringing around a much stronger peak
    let mut kept: Vec<Peak> = Vec::new();
    for p in peaks {
        let ringing = kept.iter().any(|s| {
            let d = [p.pos[0] - s.pos[0], p.pos[1] - s.pos[1]];
            let mirrored = [p.pos[0] + s.pos[0], p.pos[1] + s.pos[1]];
            norm(d).min(norm(mirrored)) < SIDELOBE_RADIUS && p.amplitude < SIDELOBE_RATIO * s.amplitude
        });
        if !ringing {
            kept.push(p);
        }
    }
    kept.truncate(MAX_PEAKS);
    kept
}

fn coords(basis: &[[f64; 2]; 2], p: [f64; 2]) -> [f64; 2] {
    let det = cross(basis[0], basis[1]);
    [cross(p, basis[1]) / det, cross(basis[0], p) / det]
}

fn off(c: [f64; 2]) -> f64 {
    (c[0] - c[0].round()).abs().max((c[1] - c[1].round()).abs())
}

/// Basis of the integer lattice spanned by `gens` (2D Hermite reduction).
fn integer_span(gens: &[[i64; 2]]) -> Option<[[i64; 2]; 2]> {
    let mut vs: Vec<[i64; 2]> = gens.iter().copied().filter(|g| *g != [0, 0]).collect();
    // Euclid on the first component
    loop {
        let nz: Vec<usize> = (0..vs.len()).filter(|&i| vs[i][0] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        let piv = *nz.iter().min_by_key(|&&i| vs[i][0].abs()).unwrap();
        let p = vs[piv];
        for &i in &nz {
            if i != piv {
                let q = vs[i][0] / p[0];
                vs[i] = [vs[i][0] - q * p[0], vs[i][1] - q * p[1]];
            }
        }
    }
    let first = vs.iter().copied().find(|v| v[0] != 0)?;
    let g = vs
        .iter()
        .filter(|v| v[0] == 0)
        .fold(0i64, |acc, v| gcd(acc, v[1].abs()));
    if g == 0 {
        return None;
    }
    Some([first, [0, g]])
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn reduce2(basis: &mut [[f64; 2]; 2]) {
    for _ in 0..100 {
        if dot(basis[0], basis[0]) > dot(basis[1], basis[1]) {
            basis.swap(0, 1);
        }
        let mu = (dot(basis[0], basis[1]) / dot(basis[0], basis[0])).round();
        if mu == 0.0 {
            break;
        }
        basis[1] = [basis[1][0] - mu * basis[0][0], basis[1][1] - mu * basis[0][1]];
    }
}

/// Weighted least-squares fit of a*, b* to indexed peak positions.
fn refine(peaks: &[(Peak, [i32; 2])]) -> Result<([f64; 2], [f64; 2], f64)> {
    let (mut hh, mut hk, mut kk) = (0.0, 0.0, 0.0);
    let mut rhs = [[0.0; 2]; 2];
    for (p, [h, k]) in peaks {
        let w = p.amplitude;
        let (h, k) = (*h as f64, *k as f64);
        hh += w * h * h;
        hk += w * h * k;
        kk += w * k * k;
        for c in 0..2 {
            rhs[0][c] += w * h * p.pos[c];
            rhs[1][c] += w * k * p.pos[c];
        }
    }
    let det = hh * kk - hk * hk;
    if det.abs() <= 1e-9 * (hh * kk).max(1e-300) {
        return Err(Error::RankDeficient);
    }
    let mut a = [0.0; 2];
    let mut b = [0.0; 2];
    for c in 0..2 {
        a[c] = (kk * rhs[0][c] - hk * rhs[1][c]) / det;
        b[c] = (hh * rhs[1][c] - hk * rhs[0][c]) / det;
    }
    let mut ss = 0.0;
    for (p, [h, k]) in peaks {
        let (h, k) = (*h as f64, *k as f64);
        let dx = p.pos[0] - h * a[0] - k * b[0];
        let dy = p.pos[1] - h * a[1] - k * b[1];
        ss += dx * dx + dy * dy;
    }
    Ok((a, b, (ss / peaks.len() as f64).sqrt()))
}

pub fn find_lattice(map: &SpectralMap, min_peak_snr: f64) -> Result<ReciprocalBasis> {
    find_lattice_detailed(map, min_peak_snr).map(|f| f.basis)
}

pub fn find_lattice_detailed(map: &SpectralMap, min_peak_snr: f64) -> Result<LatticeFit> {
    let peaks = detect_peaks(map, min_peak_snr);
    if peaks.len() < 2 {
        return Err(Error::TooFewPeaks);
    }
    let strongest = peaks[0].amplitude;
    let strong: Vec<Peak> = peaks
        .iter()
        .take(30)
        .filter(|p| p.amplitude >= SIGNIFICANT * strongest)
        .copied()
        .collect();
    let mut by_len = strong.clone();
    by_len.sort_by(|p, q| norm(p.pos).total_cmp(&norm(q.pos)));
    let first = by_len[0];
    let second = by_len
        .iter()
        .skip(1)
        .find(|p| (cross(first.pos, p.pos) / (norm(first.pos) * norm(p.pos))).abs() > 0.1);
    let Some(second) = second else {
        let all_collinear = peaks
            .iter()
            .all(|p| (cross(first.pos, p.pos) / (norm(first.pos) * norm(p.pos))).abs() <= 0.1);
        return Err(if all_collinear {
            Error::CollinearPeaks
        } else {
            Error::TooFewPeaks
        });
    };
    let mut basis = [first.pos, second.pos];
    reduce2(&mut basis);
    for _ in 0..10 {
        let mut changed = false;
        for p in &strong {
            let c = coords(&basis, p.pos);
            if off(c) < INDEX_TOL {
                continue;
            }
            for d in 2..=4i64 {
                let dc = [c[0] * d as f64, c[1] * d as f64];
                if off(dc) < INDEX_TOL {
                    let n = [dc[0].round() as i64, dc[1].round() as i64];
                    if let Some(span) = integer_span(&[[d, 0], [0, d], n]) {
                        let vec_of = |g: [i64; 2]| {
                            let (g0, g1) = (g[0] as f64 / d as f64, g[1] as f64 / d as f64);
                            [
                                g0 * basis[0][0] + g1 * basis[1][0],
                                g0 * basis[0][1] + g1 * basis[1][1],
                            ]
                        };
                        let candidate = [vec_of(span[0]), vec_of(span[1])];
                        if norm(candidate[0]).min(norm(candidate[1])) >= DC_EXCLUSION {
                            basis = candidate;
                            reduce2(&mut basis);
                            changed = true;
                        }
                    }
                    break;
                }
            }
            if changed {
                break;
            }
        }
        if !changed {
            break;
        }
    }
    let mut fit_rms = 0.0;
    let mut indexed_count = 0;
    for _ in 0..3 {
        let indexed: Vec<(Peak, [i32; 2])> = peaks
            .iter()
            .filter_map(|p| {
                let c = coords(&basis, p.pos);
                (off(c) < INDEX_TOL).then(|| (*p, [c[0].round() as i32, c[1].round() as i32]))
            })
            .filter(|(_, hk)| *hk != [0, 0])
            .collect();
        let (a, b, rms) = refine(&indexed)?;
        basis = [a, b];
        fit_rms = rms;
        indexed_count = indexed.len();
    }
    let unindexed: Vec<Peak> = peaks
        .iter()
        .filter(|p| off(coords(&basis, p.pos)) >= INDEX_TOL)
        .copied()
        .collect();
    let mut rb = ReciprocalBasis::new(basis[0], basis[1], map.size())?;
    rb.fit_rms = fit_rms;
    let (reduced, _) = rb.reduced();
    log::debug!(
        "lattice: a* {:?} b* {:?}, {indexed_count} of {} peaks indexed, rms {fit_rms:.3e}",
        reduced.a_star,
        reduced.b_star,
        peaks.len()
    );
    Ok(LatticeFit {
        basis: reduced,
        peaks,
        indexed: indexed_count,
        unindexed,
    })
}
