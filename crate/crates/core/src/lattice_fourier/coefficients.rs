use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lattice::ReciprocalBasis;
use super::spectral::{fft2_inplace, SpectralMap};
use crate::error::{Error, Result};
use crate::image_io::{HkaRecord, RasterImage};

/// Amplitude of the strongest coefficient after normalization.
pub const NORMALIZED_MAX: f64 = 10000.0;

pub type Index = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficient {
    pub h: i32,
    pub k: i32,
    pub amplitude: f64,
    /// Radians in (-pi, pi].
    pub phase: f64,
}

impl FourierCoefficient {
    pub fn complex(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Where the coefficients came from in pixel space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// Image pixel at window offset (0, 0).
    pub origin: (f64, f64),
    /// Side of the square DFT window.
    pub size: usize,
}

/// Structure-bearing coefficients keyed by Laue index, both Friedel mates stored.
///
/// Values are on the normalized scale (strongest amplitude 10000 for a set extracted from an
/// image). `scale` converts back to raw DFT units.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    coeffs: BTreeMap<Index, Complex64>,
    absent: BTreeSet<Index>,
    pub dynamic_range: f64,
    pub resolution_radius: f64,
    pub basis: Option<ReciprocalBasis>,
    pub scale: f64,
    /// Amplitude that counts as 1 in residual sums (the translation-averaged maximum).
    pub unit: f64,
    pub mean_level: f64,
    pub window: Option<Window>,
}

impl CoefficientSet {
    /// Bare set without image provenance, stored exactly as given (minus DC).
    pub fn from_map(coeffs: BTreeMap<Index, Complex64>) -> Self {
        let mut set = Self {
            coeffs,
            absent: BTreeSet::new(),
            dynamic_range: f64::INFINITY,
            resolution_radius: f64::INFINITY,
            basis: None,
            scale: 1.0,
            unit: 1.0,
            mean_level: 0.0,
            window: None,
        };
        set.coeffs.remove(&(0, 0));
        set
    }

    /// Residual unit is the largest amplitude in the file.
    pub fn from_hka(records: &[HkaRecord]) -> Self {
        let map = records
            .iter()
            .filter(|r| (r.h, r.k) != (0, 0))
            .map(|r| ((r.h, r.k), Complex64::from_polar(r.amplitude, r.phase.to_radians())))
            .collect();
        let mut set = Self::from_map(map).with_friedel_mates();
        let max = set.max_amplitude();
        if max > 0.0 {
            set.unit = max;
        }
        set
    }

    pub fn to_hka(&self) -> Vec<HkaRecord> {
        self.coeffs
            .iter()
            .map(|(&(h, k), c)| HkaRecord {
                h,
                k,
                amplitude: c.norm(),
                phase: c.arg().to_degrees().rem_euclid(360.0),
            })
            .collect()
    }

    /// Adds conj(F(h)) at -h wherever the mate is missing.
    pub fn with_friedel_mates(mut self) -> Self {
        let missing: Vec<(Index, Complex64)> = self
            .coeffs
            .iter()
            .filter(|(&(h, k), _)| !self.coeffs.contains_key(&(-h, -k)))
            .map(|(&(h, k), c)| ((-h, -k), c.conj()))
            .collect();
        self.coeffs.extend(missing);
        self
    }

    /// Same provenance, new coefficient values.
    pub fn with_coefficients(&self, coeffs: BTreeMap<Index, Complex64>, absent: BTreeSet<Index>) -> Self {
        Self {
            coeffs,
            absent,
            dynamic_range: self.dynamic_range,
            resolution_radius: self.resolution_radius,
            basis: self.basis,
            scale: self.scale,
            unit: self.unit,
            mean_level: self.mean_level,
            window: self.window,
        }
    }

    pub fn n_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, h: i32, k: i32) -> Option<Complex64> {
        self.coeffs.get(&(h, k)).copied()
    }

    pub fn coefficient(&self, h: i32, k: i32) -> Option<FourierCoefficient> {
        self.get(h, k).map(|c| FourierCoefficient {
            h,
            k,
            amplitude: c.norm(),
            phase: c.arg(),
        })
    }

    pub fn contains(&self, h: i32, k: i32) -> bool {
        self.coeffs.contains_key(&(h, k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Index, Complex64)> + '_ {
        self.coeffs.iter().map(|(i, c)| (*i, *c))
    }

    pub fn coefficients(&self) -> Vec<FourierCoefficient> {
        self.coeffs
            .iter()
            .map(|(&(h, k), c)| FourierCoefficient {
                h,
                k,
                amplitude: c.norm(),
                phase: c.arg(),
            })
            .collect()
    }

    pub fn map(&self) -> &BTreeMap<Index, Complex64> {
        &self.coeffs
    }

    /// Indices a symmetry model forced to zero.
    pub fn absent(&self) -> &BTreeSet<Index> {
        &self.absent
    }

    pub fn max_amplitude(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of |F|^2 in residual units.
    pub fn power(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>() / (self.unit * self.unit)
    }

    /// Translates the pattern by `s` (fractional): F(h) -> F(h) exp(-2 pi i h.s).
    pub fn shifted(&self, s: [f64; 2]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&(h, k), c)| {
                let ph = -2.0 * PI * (h as f64 * s[0] + k as f64 * s[1]);
                ((h, k), c * Complex64::from_polar(1.0, ph))
            })
            .collect();
        self.with_coefficients(coeffs, self.absent.clone())
    }

    /// Re-indexes through h' = h U (used after basis reduction).
    pub fn reindexed(&self, u: [[i32; 2]; 2], basis: Option<ReciprocalBasis>) -> Self {
        let f = |(h, k): Index| (h * u[0][0] + k * u[1][0], h * u[0][1] + k * u[1][1]);
        let coeffs = self.coeffs.iter().map(|(&i, c)| (f(i), *c)).collect();
        let absent = self.absent.iter().map(|&i| f(i)).collect();
        let mut out = self.with_coefficients(coeffs, absent);
        out.basis = basis;
        out
    }
}

/// Samples every (h, k) within `resolution_radius` bins, normalizes to max 10000 and
/// discards amplitudes below 10000 / dynamic_range.
pub fn extract_coefficients(
    map: &SpectralMap,
    basis: &ReciprocalBasis,
    dynamic_range: f64,
    resolution_radius: f64,
) -> Result<CoefficientSet> {
    if !(dynamic_range >= 1.0) {
        return Err(Error::InvalidParameter("dynamic_range must be >= 1".into()));
    }
    let nyquist = map.size() as f64 / 2.0;
    if !(resolution_radius > 0.0) || resolution_radius > nyquist + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "resolution radius {resolution_radius} outside (0, {nyquist}]"
        )));
    }
    let d = basis.direct();
    let (la, lb) = d.lengths();
    let m = map.size() as f64;
    let hmax = (resolution_radius * la / m).ceil() as i32 + 1;
    let kmax = (resolution_radius * lb / m).ceil() as i32 + 1;
    let mut raw = BTreeMap::new();
    for h in 0..=hmax {
        for k in -kmax..=kmax {
            if h == 0 && k <= 0 {
                continue;
            }
            let q = basis.q(h, k);
            if (q[0] * q[0] + q[1] * q[1]).sqrt() > resolution_radius {
                continue;
            }
            let c = map.sample(q[0], q[1]);
            raw.insert((h, k), c);
            raw.insert((-h, -k), c.conj());
        }
    }
    let max = raw.values().map(|c| c.norm()).fold(0.0, f64::max);
    if raw.is_empty() || max <= 0.0 {
        return Err(Error::EmptyCoefficientSet);
    }
    let scale = max / NORMALIZED_MAX;
    let threshold = NORMALIZED_MAX / dynamic_range;
    let coeffs: BTreeMap<Index, Complex64> = raw
        .into_iter()
        .map(|(i, c)| (i, c / scale))
        .filter(|(_, c)| c.norm() >= threshold * (1.0 - 1e-12))
        .collect();
    if coeffs.is_empty() {
        return Err(Error::EmptyCoefficientSet);
    }
    Ok(CoefficientSet {
        coeffs,
        absent: BTreeSet::new(),
        dynamic_range,
        resolution_radius,
        basis: Some(*basis),
        scale,
        unit: NORMALIZED_MAX,
        mean_level: map.mean_level(),
        window: Some(Window {
            origin: map.window_origin(),
            size: map.size(),
        }),
    })
}

/// Synthesizes `mean_level + sum F_j exp(2 pi i q_j . x)` over an output grid.
///
/// Pixel (x, y) is placed at offset (x, y) - window origin. When every q_j lands on an
/// integer bin the synthesis uses an inverse FFT, otherwise a direct separable sum.
pub fn back_transform(set: &CoefficientSet, out_size: (usize, usize), mean_level: f64) -> Result<RasterImage> {
    let (w, h) = out_size;
    if set.is_empty() {
        return RasterImage::filled(w, h, mean_level);
    }
    let basis = set
        .basis
        .ok_or_else(|| Error::InvalidParameter("coefficient set has no lattice basis".into()))?;
    let window = set.window.unwrap_or(Window {
        origin: (0.0, 0.0),
        size: basis.grid,
    });
    let m = basis.grid;
    let norm = set.scale / (m * m) as f64;
    let terms: Vec<([f64; 2], Complex64)> = set
        .iter()
        .map(|((hh, kk), c)| (basis.q(hh, kk), c * norm))
        .collect();
    let on_grid = terms
        .iter()
        .all(|(q, _)| (q[0] - q[0].round()).abs() < 1e-9 && (q[1] - q[1].round()).abs() < 1e-9)
        && window.origin.0.fract() == 0.0
        && window.origin.1.fract() == 0.0;
    let (ox, oy) = window.origin;
    if on_grid {
        let mut grid = vec![Complex64::new(0.0, 0.0); m * m];
        for (q, c) in &terms {
            let u = (q[0].round() as i64).rem_euclid(m as i64) as usize;
            let v = (q[1].round() as i64).rem_euclid(m as i64) as usize;
            grid[v * m + u] += c;
        }
        fft2_inplace(&mut grid, m, true);
        return RasterImage::from_fn(w, h, |x, y| {
            let gx = (x as i64 - ox as i64).rem_euclid(m as i64) as usize;
            let gy = (y as i64 - oy as i64).rem_euclid(m as i64) as usize;
            mean_level + grid[gy * m + gx].re
        });
    }
    let mf = m as f64;
    // x phase factors, term-major, so each pixel is a run of multiply-adds
    let ex: Vec<Complex64> = terms
        .iter()
        .flat_map(|(q, _)| (0..w).map(move |x| Complex64::from_polar(1.0, 2.0 * PI * q[0] * (x as f64 - ox) / mf)))
        .collect();
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let dy = y as f64 - oy;
            let mut row = vec![mean_level; w];
            for (j, (q, c)) in terms.iter().enumerate() {
                let cy = c * Complex64::from_polar(1.0, 2.0 * PI * q[1] * dy / mf);
                for (v, e) in row.iter_mut().zip(&ex[j * w..(j + 1) * w]) {
                    *v += cy.re * e.re - cy.im * e.im;
                }
            }
            row
        })
        .collect();
    RasterImage::new(w, h, rows.concat())
}
