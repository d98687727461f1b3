use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::image_io::{RasterImage, RegionSelection};

/// DC-centred discrete Fourier transform of a square window.
///
/// Bin (u, v) with u, v in [-M/2, M/2) holds `sum I(x,y) exp(-2 pi i (u x + v y) / M)`,
/// where (x, y) are pixel offsets from `window_origin`.
#[derive(Debug, Clone)]
pub struct SpectralMap {
    size: usize,
    data: Vec<Complex64>,
    window_origin: (f64, f64),
    fill_value: f64,
}

impl SpectralMap {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn width(&self) -> usize {
        self.size
    }

    pub fn height(&self) -> usize {
        self.size
    }

    /// Image pixel that maps to window offset (0, 0).
    pub fn window_origin(&self) -> (f64, f64) {
        self.window_origin
    }

    /// Value used for pixels outside the selection.
    pub fn fill_value(&self) -> f64 {
        self.fill_value
    }

    fn wrap(&self, f: i64) -> usize {
        (f.rem_euclid(self.size as i64)) as usize
    }

    /// Coefficient at integer frequency (u, v), periodic in M.
    pub fn at(&self, u: i64, v: i64) -> Complex64 {
        let m = self.size;
        let iu = self.wrap(u + (m / 2) as i64);
        let iv = self.wrap(v + (m / 2) as i64);
        self.data[iv * m + iu]
    }

    /// Complex bilinear interpolation at a fractional frequency.
    pub fn sample(&self, u: f64, v: f64) -> Complex64 {
        let u0 = u.floor();
        let v0 = v.floor();
        let fu = u - u0;
        let fv = v - v0;
        let (u0, v0) = (u0 as i64, v0 as i64);
        self.at(u0, v0) * ((1.0 - fu) * (1.0 - fv))
            + self.at(u0 + 1, v0) * (fu * (1.0 - fv))
            + self.at(u0, v0 + 1) * ((1.0 - fu) * fv)
            + self.at(u0 + 1, v0 + 1) * (fu * fv)
    }

    pub fn dc(&self) -> Complex64 {
        self.at(0, 0)
    }

    /// Mean of the padded window.
    pub fn mean_level(&self) -> f64 {
        self.dc().re / (self.size * self.size) as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        let m = self.size as i64;
        let half = m / 2;
        self.data.iter().enumerate().map(move |(i, c)| {
            let i = i as i64;
            ((i % m - half, i / m - half), *c)
        })
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm()).collect()
    }
}

/// In-place 2D FFT on a row-major square grid.
pub(crate) fn fft2_inplace(data: &mut [Complex64], m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for x in 0..m {
        for y in 0..m {
            col[y] = data[y * m + x];
        }
        fft.process(&mut col);
        for y in 0..m {
            data[y * m + x] = col[y];
        }
    }
}

/// Forward DFT of the selected region.
///
/// The window is the square bounding the selection (the whole image padded to square
/// for a full selection). Pixels outside the selection are set to the selection mean.
pub fn dft2(image: &RasterImage, region: &RegionSelection) -> Result<SpectralMap> {
    if region.dims() != (image.width(), image.height()) {
        return Err(Error::RegionOutOfBounds);
    }
    let n_sel = region.pixel_count();
    if n_sel == 0 {
        return Err(Error::EmptySelection);
    }
    let mut sum = 0.0;
    for y in 0..image.height() {
        for x in 0..image.width() {
            if region.contains(x, y) {
                sum += image.get(x, y);
            }
        }
    }
    let mean = sum / n_sel as f64;
    let (x0, y0, x1, y1) = region.bounding_box();
    let m = (x1 - x0 + 1).max(y1 - y0 + 1);
    let mut data = vec![Complex64::new(mean, 0.0); m * m];
    for wy in 0..m {
        for wx in 0..m {
            let (x, y) = (x0 + wx, y0 + wy);
            if x < image.width() && y < image.height() && region.contains(x, y) {
                data[wy * m + wx] = Complex64::new(image.get(x, y), 0.0);
            }
        }
    }
    fft2_inplace(&mut data, m, false);
    // shift so that frequency 0 sits at index M/2
    let mut shifted = vec![Complex64::new(0.0, 0.0); m * m];
    let half = m / 2;
    for v in 0..m {
        for u in 0..m {
            let su = (u + half) % m;
            let sv = (v + half) % m;
            shifted[sv * m + su] = data[v * m + u];
        }
    }
    Ok(SpectralMap {
        size: m,
        data: shifted,
        window_origin: (x0 as f64, y0 as f64),
        fill_value: mean,
    })
}
