use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::RasterImage;
use crate::lattice_fourier::{fft2_inplace, Index, ReciprocalBasis};
use crate::symmetrize::{act, GroupSetting, LatticeKind, MetricTolerances, Operation};

/// Gaussian blob in fractional cell coordinates. `sigma_px` is the Cartesian width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center: [f64; 2],
    pub sigma_px: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeRequest {
    /// The most general lattice the group's metric allows.
    Auto,
    Oblique,
    Rectangular,
    Rhombic,
    Square,
    Hexagonal,
}

/// Integer reciprocal lattice on an M x M grid, so the pattern is exactly periodic in the
/// image and every reflection lands on a DFT bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthLattice {
    pub a_star: [i64; 2],
    pub b_star: [i64; 2],
    pub grid: usize,
}

impl SynthLattice {
    pub fn basis(&self) -> ReciprocalBasis {
        let f = |v: [i64; 2]| [v[0] as f64, v[1] as f64];
        ReciprocalBasis::new(f(self.a_star), f(self.b_star), self.grid).expect("non-degenerate synth lattice")
    }

    /// Number of unit cells in the M x M image.
    pub fn cell_count(&self) -> i64 {
        (self.a_star[0] * self.b_star[1] - self.a_star[1] * self.b_star[0]).abs()
    }

    fn bin(&self, h: Index) -> (i64, i64) {
        let (h, k) = (h.0 as i64, h.1 as i64);
        (h * self.a_star[0] + k * self.b_star[0], h * self.a_star[1] + k * self.b_star[1])
    }
}

fn round(x: f64) -> i64 {
    x.round() as i64
}

/// Reciprocal lattice with about `cells` cells per image edge for the requested metric.
pub fn lattice_for(kind: LatticeKind, cells: usize, cell_px: usize) -> SynthLattice {
    let n = cells as i64;
    let nf = cells as f64;
    let grid = cells * cell_px;
    let (a_star, b_star) = match kind {
        LatticeKind::Square => ([n, 0], [0, n]),
        LatticeKind::Rectangular => ([n, 0], [0, round(nf * 4.0 / 3.0)]),
        LatticeKind::Rhombic => ([round(nf * 2.0 / 3.0), n], [round(nf * 2.0 / 3.0), -n]),
        LatticeKind::Oblique => ([n, 0], [round(nf / 3.0), n]),
        LatticeKind::Hexagonal => hex_approximant(nf),
    };
    // adopt the reduced orientation so settings read back under the same names
    let raw = SynthLattice { a_star, b_star, grid };
    let (reduced, _) = raw.basis().reduced();
    let int = |v: [f64; 2]| [round(v[0]), round(v[1])];
    SynthLattice {
        a_star: int(reduced.a_star),
        b_star: int(reduced.b_star),
        grid,
    }
}

/// Integer pair closest to a 120 degree equal-length pair with length near `n`.
fn hex_approximant(n: f64) -> ([i64; 2], [i64; 2]) {
    let lim = (1.6 * n).ceil() as i64;
    let mut best: Option<(f64, [i64; 2], [i64; 2])> = None;
    for x in 1..=lim {
        for y in 0..=lim {
            let l = ((x * x + y * y) as f64).sqrt();
            if l < 0.9 * n || l > 1.4 * n {
                continue;
            }
            let (c, s) = ((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
            let v2 = [round(c * x as f64 - s * y as f64), round(s * x as f64 + c * y as f64)];
            let l2 = ((v2[0] * v2[0] + v2[1] * v2[1]) as f64).sqrt();
            let cos = (x * v2[0] + y * v2[1]) as f64 / (l * l2);
            let err = ((l - l2) / l).abs() * 100.0 + (cos.acos().to_degrees() - 120.0).abs();
            if best.as_ref().is_none_or(|b| err < b.0 - 1e-12) {
                best = Some((err, [x, y], v2));
            }
        }
    }
    let (_, a, b) = best.expect("search range is non-empty");
    (a, b)
}

/// Pattern description: an asymmetric unit made of Gaussian blobs, replicated by `group`.
///
/// With `pseudo_supergroup` set, the copies generated by supergroup operations outside
/// `group` use a deformed asymmetric unit whose `tip` blob sits (1 + pseudo_delta) times
/// as far from the cell origin, so `group` stays exact and the supergroup is broken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifSpec {
    pub blobs: Vec<Blob>,
    pub group: &'static str,
    pub cell_px: usize,
    pub cells: usize,
    pub lattice: LatticeRequest,
    pub pseudo_supergroup: Option<&'static str>,
    pub pseudo_delta: f64,
    pub tip: usize,
    /// Blobs added once per cell without symmetrization.
    pub imperfection: Vec<Blob>,
    /// Output gray-level range of the rendered pattern.
    pub range: (f64, f64),
}

impl MotifSpec {
    pub fn new(group: &'static str, blobs: Vec<Blob>) -> Self {
        Self {
            blobs,
            group,
            cell_px: 96,
            cells: 12,
            lattice: LatticeRequest::Auto,
            pseudo_supergroup: None,
            pseudo_delta: 0.0,
            tip: 0,
            imperfection: Vec::new(),
            range: (30.0, 225.0),
        }
    }

    fn lattice_kind(&self, group: &GroupSetting) -> LatticeKind {
        match self.lattice {
            LatticeRequest::Auto => group.lattice,
            LatticeRequest::Oblique => LatticeKind::Oblique,
            LatticeRequest::Rectangular => LatticeKind::Rectangular,
            LatticeRequest::Rhombic => LatticeKind::Rhombic,
            LatticeRequest::Square => LatticeKind::Square,
            LatticeRequest::Hexagonal => LatticeKind::Hexagonal,
        }
    }

    /// Lattice the pattern will be rendered on.
    pub fn synth_lattice(&self) -> Result<SynthLattice> {
        let group = resolve(self.group)?;
        let top = match self.pseudo_supergroup {
            Some(s) => resolve(s)?,
            None => group,
        };
        Ok(lattice_for(self.lattice_kind(top), self.cells, self.cell_px))
    }
}

fn resolve(name: &str) -> Result<&'static GroupSetting> {
    crate::symmetrize::plane_group(name).ok_or_else(|| Error::UnknownModel(name.to_string()))
}

fn ops_on(group: &GroupSetting, basis: &ReciprocalBasis) -> Result<Vec<Operation>> {
    let u = group
        .lattice
        .setting_transform(&basis.direct(), &MetricTolerances::default())
        .ok_or_else(|| Error::MetricMismatch {
            model: group.name.to_string(),
        })?;
    Ok(group.operations_in(u))
}

/// Fourier transform of a blob set on the unit cell, at index h.
fn blob_factor(blobs: &[Blob], q: [f64; 2], area: f64, h: [f64; 2]) -> Complex64 {
    let q2 = q[0] * q[0] + q[1] * q[1];
    blobs
        .iter()
        .map(|b| {
            let s2 = b.sigma_px * b.sigma_px;
            let amp = b.weight * 2.0 * PI * s2 / area * (-2.0 * PI * PI * s2 * q2).exp();
            Complex64::from_polar(amp, -2.0 * PI * (h[0] * b.center[0] + h[1] * b.center[1]))
        })
        .sum()
}

/// Renders the pattern of `spec` as an M x M image (M = cells * cell_px).
pub fn generate_pattern(spec: &MotifSpec) -> Result<RasterImage> {
    if spec.blobs.is_empty() || spec.cells == 0 || spec.cell_px < 4 {
        return Err(Error::InvalidParameter("motif needs blobs, cells >= 1 and cell_px >= 4".into()));
    }
    if !(0.0..=1.0).contains(&spec.pseudo_delta) {
        return Err(Error::InvalidParameter("pseudo_delta must lie in [0, 1]".into()));
    }
    if spec.tip >= spec.blobs.len() {
        return Err(Error::InvalidParameter("tip index outside the blob list".into()));
    }
    let group = resolve(spec.group)?;
    let top = match spec.pseudo_supergroup {
        Some(s) => {
            let sup = resolve(s)?;
            if !sup.contains_group(group) || sup.k() == group.k() {
                return Err(Error::InvalidParameter(format!("{s} is not a proper supergroup of {}", group.name)));
            }
            sup
        }
        None => group,
    };
    let lat = spec.synth_lattice()?;
    let basis = lat.basis();
    let ops = ops_on(top, &basis)?;
    let own = ops_on(group, &basis)?;
    let in_group: Vec<bool> = ops.iter().map(|o| own.iter().any(|g| g.same_mod_lattice(o))).collect();
    let mut deformed = spec.blobs.clone();
    let tip = &mut deformed[spec.tip];
    tip.center = [
        tip.center[0] * (1.0 + spec.pseudo_delta),
        tip.center[1] * (1.0 + spec.pseudo_delta),
    ];

    let m = lat.grid;
    let mf = m as f64;
    let area = basis.cell_area();
    let limit = 0.4 * mf;
    // index box covering |q| <= limit, closed under the point group so orbits stay whole
    let d = basis.direct();
    let (la, lb) = d.lengths();
    let hmax = (limit * la / mf).ceil() as i32 + 1;
    let kmax = (limit * lb / mf).ceil() as i32 + 1;
    let mut indices = BTreeSet::new();
    for h in -hmax..=hmax {
        for k in -kmax..=kmax {
            let q = basis.q(h, k);
            if (q[0] * q[0] + q[1] * q[1]).sqrt() <= limit {
                for o in &ops {
                    let g = act((h, k), o.r);
                    indices.insert(g);
                    indices.insert((-g.0, -g.1));
                }
            }
        }
    }

    let factor = |blobs: &[Blob], h: Index| {
        let q = basis.q(h.0, h.1);
        let qc = [q[0] / mf, q[1] / mf];
        blob_factor(blobs, qc, area, [h.0 as f64, h.1 as f64])
    };
    let mut data = vec![Complex64::new(0.0, 0.0); m * m];
    for &h in &indices {
        if h == (0, 0) {
            continue;
        }
        let mut f = Complex64::new(0.0, 0.0);
        for (o, &inside) in ops.iter().zip(&in_group) {
            let blobs = if inside { &spec.blobs } else { &deformed };
            let phase = -2.0 * PI * (h.0 as f64 * o.t[0] + h.1 as f64 * o.t[1]);
            f += Complex64::from_polar(1.0, phase) * factor(blobs, act(h, o.r));
        }
        if !spec.imperfection.is_empty() {
            f += factor(&spec.imperfection, h);
        }
        let (u, v) = lat.bin(h);
        let (u, v) = (u.rem_euclid(m as i64) as usize, v.rem_euclid(m as i64) as usize);
        data[v * m + u] += f;
    }
    fft2_inplace(&mut data, m, true);
    let values: Vec<f64> = data.iter().map(|c| c.re).collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (out_lo, out_hi) = spec.range;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels = values.iter().map(|v| out_lo + (v - lo) / span * (out_hi - out_lo)).collect();
    RasterImage::new(m, m, pixels)
}
