//! Residual sums, geometric AIC, the ascent inequality, noise estimate and confidence levels.
//!
//! Models have dimension d = 0 and co-dimension r = 1, so a model with k operations per
//! lattice point on N coefficients has N/k free parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice_fourier::CoefficientSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPair {
    pub j_complex: f64,
    pub j_amplitude: f64,
    pub n_count: usize,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaicParams {
    pub d: u32,
    pub r: u32,
    pub eps2: f64,
}

impl GaicParams {
    pub fn new(eps2: f64) -> Self {
        Self { d: 0, r: 1, eps2 }
    }
}

fn residual_by(trans: &CoefficientSet, sym: &CoefficientSet, f: impl Fn(num_complex::Complex64, num_complex::Complex64) -> f64) -> Result<f64> {
    let mut total = 0.0;
    let mut matched = 0usize;
    for ((h, k), ft) in trans.iter() {
        if let Some(fs) = sym.get(h, k) {
            total += f(ft, fs);
            matched += 1;
        } else if sym.absent().contains(&(h, k)) {
            total += ft.norm_sqr();
            matched += 1;
        }
    }
    if matched == 0 && !trans.is_empty() && !sym.is_empty() {
        return Err(Error::DisjointIndexSets);
    }
    Ok(total / (trans.unit * trans.unit))
}

/// Sum of |F_trans - F_sym|^2 over matching indices, in units of the translation-averaged
/// maximum. Indices the model declares absent count as |F_trans|^2.
pub fn residual_complex(trans: &CoefficientSet, sym: &CoefficientSet) -> Result<f64> {
    residual_by(trans, sym, |t, s| (t - s).norm_sqr())
}

/// Sum of (|F_trans| - |F_sym|)^2, same conventions as [`residual_complex`].
pub fn residual_amplitude(trans: &CoefficientSet, sym: &CoefficientSet) -> Result<f64> {
    residual_by(trans, sym, |t, s| (t.norm() - s.norm()).powi(2))
}

/// J + 2 (N / k) eps2.
pub fn gaic_value(j: f64, n_count: usize, k: usize, eps2: f64) -> f64 {
    j + 2.0 * (n_count as f64 / k as f64) * eps2
}

/// Right-hand side of the ascent inequality for climbing from a k_l model to a k_m model.
pub fn ascent_rhs(k_m: usize, k_l: usize, n_m: usize, n_l: usize) -> Result<f64> {
    if k_l <= 1 {
        return Err(Error::InvalidAscent(k_l));
    }
    if n_l == 0 || k_m == 0 {
        return Err(Error::InvalidParameter("N and k must be positive".into()));
    }
    let (km, kl) = (k_m as f64, k_l as f64);
    let ratio = n_m as f64 / n_l as f64;
    Ok(1.0 + 2.0 * (km - ratio * kl) / (km * (kl - 1.0)))
}

/// Equal-N form of [`ascent_rhs`].
pub fn equal_n_inset(k_m: usize, k_l: usize) -> Option<f64> {
    (k_l >= 2).then(|| 1.0 + 2.0 * (k_m as f64 - k_l as f64) / (k_m as f64 * (k_l as f64 - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Passes iff J_m / J_l < rhs.
pub fn ascent_test(j_m: f64, j_l: f64, k_m: usize, k_l: usize, n_m: usize, n_l: usize) -> Result<AscentOutcome> {
    if j_l <= 0.0 {
        return Err(Error::ZeroResidual);
    }
    let rhs = ascent_rhs(k_m, k_l, n_m, n_l)?;
    let lhs = j_m / j_l;
    Ok(AscentOutcome {
        lhs,
        rhs,
        pass: lhs < rhs,
    })
}

/// eps^2 = J / (N - N/k).
pub fn noise_estimate(j: f64, n_count: usize, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::NoiseUndefined);
    }
    let n = n_count as f64;
    Ok(j / (n - n / k as f64))
}

/// Confidence in a k_m model over its maximal subgroup k_l given ratio = J_m / J_l.
///
/// K^2 = (ratio + c) / (1 + 2/(k_l - 1)) with c fixed so that K = 1 exactly at the ascent
/// boundary; C = (1 - K) / (1 - K(1)). Hence C(1) = 1, C(rhs) = 0, C decreasing, and C < 0
/// once the ascent test fails.
pub fn confidence_level(ratio: f64, k_m: usize, k_l: usize, n_m: usize, n_l: usize) -> Result<f64> {
    if !(ratio >= 0.0) {
        return Err(Error::InvalidParameter(format!("ratio {ratio} must be >= 0")));
    }
    let rhs = ascent_rhs(k_m, k_l, n_m, n_l)?;
    if rhs <= 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "ascent bound {rhs} <= 1 leaves no confidence interval"
        )));
    }
    let denom = 1.0 + 2.0 / (k_l as f64 - 1.0);
    let c = denom - rhs;
    let k_of = |r: f64| ((r + c) / denom).sqrt();
    let k_crit = k_of(1.0);
    Ok((1.0 - k_of(ratio)) / (1.0 - k_crit))
}
