use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::motif::{generate_pattern, Blob, MotifSpec};
use super::noise::{apply_noise, NoiseSpec};
use crate::error::Result;
use crate::image_io::RasterImage;

/// Random asymmetric unit for `group`: `n` blobs at general positions with mixed signs.
pub fn random_motif(group: &'static str, n: usize, seed: u64) -> MotifSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blobs = (0..n)
        .map(|i| Blob {
            center: [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
            sigma_px: rng.gen_range(2.0..4.0),
            weight: if i % 3 == 2 {
                -rng.gen_range(0.3..0.8)
            } else {
                rng.gen_range(0.5..1.0)
            },
        })
        .collect();
    MotifSpec::new(group, blobs)
}

/// Three-pattern experiment: a p4 pattern with a broken p4gm pseudosymmetry and a small
/// periodic imperfection, then the same with moderate and with heavy added noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrioSpec {
    pub seed: u64,
    pub pseudo_delta: f64,
    /// Weight of the unsymmetrized per-cell imperfection blobs.
    pub imperfection: f64,
    pub sigma: f64,
    pub spread_radius: usize,
    /// Noise multiplier of the heavy pattern.
    pub heavy_factor: f64,
    pub cells: usize,
    pub cell_px: usize,
}

impl Default for TrioSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            pseudo_delta: 0.2,
            imperfection: 0.06,
            sigma: 20.0,
            spread_radius: 1,
            heavy_factor: 5.0,
            cells: 12,
            cell_px: 96,
        }
    }
}

impl TrioSpec {
    pub fn motif(&self) -> MotifSpec {
        let blob = |x: f64, y: f64, s: f64, w: f64| Blob {
            center: [x, y],
            sigma_px: s,
            weight: w,
        };
        let mut spec = MotifSpec::new(
            "p4",
            vec![
                blob(0.12, 0.05, 4.0, 0.3),
                blob(0.30, 0.12, 5.0, 1.0),
                blob(0.17, 0.05, 7.0, 0.8),
                blob(0.42, 0.22, 4.0, -0.6),
                blob(0.10, 0.33, 6.0, 0.5),
            ],
        );
        spec.pseudo_supergroup = Some("p4gm");
        spec.pseudo_delta = self.pseudo_delta;
        spec.tip = 0;
        spec.cells = self.cells;
        spec.cell_px = self.cell_px;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed);
        spec.imperfection = (0..6)
            .map(|_| Blob {
                center: [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
                sigma_px: rng.gen_range(4.0..8.0),
                weight: self.imperfection * rng.gen_range(-1.0..1.0),
            })
            .collect();
        spec
    }

    pub fn moderate_noise(&self) -> NoiseSpec {
        NoiseSpec {
            gaussian_sigma: self.sigma,
            spread_radius: self.spread_radius,
            seed: self.seed.wrapping_mul(2),
        }
    }

    pub fn heavy_noise(&self) -> NoiseSpec {
        NoiseSpec {
            gaussian_sigma: self.sigma * self.heavy_factor,
            spread_radius: (self.spread_radius as f64 * self.heavy_factor.sqrt()).round() as usize,
            seed: self.seed.wrapping_mul(2).wrapping_add(100),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trio {
    pub clean: RasterImage,
    pub moderate: RasterImage,
    pub heavy: RasterImage,
}

pub fn generate_trio(spec: &TrioSpec) -> Result<Trio> {
    let clean = generate_pattern(&spec.motif())?;
    let moderate = apply_noise(&clean, &spec.moderate_noise())?;
    let heavy = apply_noise(&clean, &spec.heavy_noise())?;
    Ok(Trio { clean, moderate, heavy })
}
