use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gaussian_sigma: f64,
    pub spread_radius: usize,
    pub seed: u64,
}

/// I.i.d. normal noise, clamped to [0, 255].
pub fn add_gaussian_noise(image: &RasterImage, sigma: f64, seed: u64) -> Result<RasterImage> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma {sigma} must be finite and >= 0")));
    }
    if sigma == 0.0 {
        return Ok(image.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut out = image.clone();
    for p in out.pixels_mut() {
        *p = (*p + normal.sample(&mut rng)).clamp(0.0, 255.0);
    }
    Ok(out)
}

/// Swaps every pixel, in row-major order, with a uniformly chosen pixel within Chebyshev
/// distance `radius` (clipped at the border). Values are only permuted.
pub fn add_spread_noise(image: &RasterImage, radius: usize, seed: u64) -> RasterImage {
    let mut out = image.clone();
    if radius == 0 {
        return out;
    }
    let (w, h) = (image.width(), image.height());
    let r = radius as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let px = out.pixels_mut();
    for y in 0..h {
        for x in 0..w {
            let dx = rng.gen_range(-r..=r);
            let dy = rng.gen_range(-r..=r);
            let nx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
            let ny = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
            px.swap(y * w + x, ny * w + nx);
        }
    }
    out
}

/// Gaussian noise first, then spread noise (seeded with `seed + 1`).
pub fn apply_noise(image: &RasterImage, spec: &NoiseSpec) -> Result<RasterImage> {
    let g = add_gaussian_noise(image, spec.gaussian_sigma, spec.seed)?;
    Ok(add_spread_noise(&g, spec.spread_radius, spec.seed.wrapping_add(1)))
}
