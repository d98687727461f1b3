//! Raster images, histograms, region selection, `.hka` files and reports.

mod hka;
mod report;

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hka::{parse_hka, parse_hka_str, write_hka, format_hka, HkaRecord};
pub use report::{ascent_csv_path, read_report_json, write_report, ReportFormat};

/// Grayscale pixel grid, row-major, intensities on the 0..255 scale as floats.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "pixel count {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.pixels[y * self.width + x] = v;
    }

    /// Values rounded and clamped to 8-bit.
    pub fn to_gray8(&self) -> GrayImage {
        let mut img = GrayImage::new(self.width as u32, self.height as u32);
        for (i, p) in img.pixels_mut().enumerate() {
            *p = Luma([self.pixels[i].round().clamp(0.0, 255.0) as u8]);
        }
        img
    }
}

/// Rec. 601 luma on 0..255 channel values.
pub fn luma601(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

/// Loads a PNG or PGM/PNM file as grayscale. Colour input goes through Rec. 601 luma.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(image::ImageFormat::Png) | Some(image::ImageFormat::Pnm) => {}
        Some(f) => return Err(Error::UnsupportedFormat(format!("{f:?}"))),
        None => return Err(Error::UnsupportedFormat(path.display().to_string())),
    }
    let img = reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    from_dynamic(&img)
}

fn from_dynamic(img: &DynamicImage) -> Result<RasterImage> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::EmptyImage);
    }
    let pixels: Vec<f64> = match img {
        DynamicImage::ImageLuma8(g) => g.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0] as f64).collect(),
        DynamicImage::ImageLuma16(g) => g.pixels().map(|p| p.0[0] as f64 / 257.0).collect(),
        DynamicImage::ImageLumaA16(g) => g.pixels().map(|p| p.0[0] as f64 / 257.0).collect(),
        DynamicImage::ImageRgb8(_) | DynamicImage::ImageRgba8(_) => img
            .to_rgb8()
            .pixels()
            .map(|p| luma601(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64).round())
            .collect(),
        _ => img
            .to_rgb16()
            .pixels()
            .map(|p| luma601(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64) / 257.0)
            .collect(),
    };
    RasterImage::new(w, h, pixels)
}

/// Writes an 8-bit grayscale PNG (or PGM when the extension is `.pgm`).
pub fn save_image(image: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let fmt = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
        Some(e) if e == "pgm" || e == "pnm" => image::ImageFormat::Pnm,
        _ => image::ImageFormat::Png,
    };
    image
        .to_gray8()
        .save_with_format(path, fmt)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Serialize(other.to_string()),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionShape {
    Disk,
    Full,
}

/// A circular (or whole-image) pixel selection.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSelection {
    pub center: (f64, f64),
    pub radius: f64,
    pub shape: RegionShape,
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl RegionSelection {
    /// Pixels p with |p - center| <= radius. The disk must fit inside the image.
    pub fn disk(width: usize, height: usize, center: (f64, f64), radius: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter("radius must be non-negative".into()));
        }
        let (cx, cy) = center;
        let eps = 1e-9;
        if cx - radius < -0.5 - eps
            || cy - radius < -0.5 - eps
            || cx + radius > width as f64 - 0.5 + eps
            || cy + radius > height as f64 - 0.5 + eps
        {
            return Err(Error::RegionOutOfBounds);
        }
        let r2 = radius * radius;
        let mut mask = vec![false; width * height];
        let mut any = false;
        for y in 0..height {
            for x in 0..width {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                if dx * dx + dy * dy <= r2 {
                    mask[y * width + x] = true;
                    any = true;
                }
            }
        }
        if !any {
            return Err(Error::EmptySelection);
        }
        Ok(Self {
            center,
            radius,
            shape: RegionShape::Disk,
            width,
            height,
            mask,
        })
    }

    /// Largest disk centred in the image.
    pub fn centered_disk(width: usize, height: usize) -> Result<Self> {
        let r = (width.min(height) as f64 - 1.0) / 2.0;
        Self::disk(width, height, ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0), r)
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        Ok(Self {
            center: ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
            radius: f64::INFINITY,
            shape: RegionShape::Full,
            width,
            height,
            mask: vec![true; width * height],
        })
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Pixel bounding box (x0, y0, x1, y1), inclusive.
    pub fn bounding_box(&self) -> (usize, usize, usize, usize) {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.contains(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0, y0, x1, y1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<u64>,
    pub mean: f64,
    pub rms: f64,
    pub mad: f64,
    pub fwid: f64,
    pub min: f64,
    pub max: f64,
    pub mode_count: u64,
}

/// Statistics over the selected pixels. Bins hold values rounded and clamped to 0..255.
pub fn compute_histogram(image: &RasterImage, mask: Option<&RegionSelection>) -> Result<Histogram> {
    if let Some(m) = mask {
        if m.dims() != (image.width, image.height) {
            return Err(Error::RegionOutOfBounds);
        }
    }
    let values: Vec<f64> = image
        .pixels
        .iter()
        .enumerate()
        .filter(|(i, _)| mask.is_none_or(|m| m.mask[*i]))
        .map(|(_, &v)| v)
        .collect();
    if values.is_empty() {
        return Err(Error::EmptySelection);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let rms = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mad = values.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut bins = vec![0u64; 256];
    for v in &values {
        bins[v.round().clamp(0.0, 255.0) as usize] += 1;
    }
    let mode_count = *bins.iter().max().unwrap_or(&0);
    Ok(Histogram {
        bins,
        mean,
        rms,
        mad,
        fwid: max - min,
        min,
        max,
        mode_count,
    })
}
