//! Crystallographic image processing: enforce a plane group on the translation-averaged
//! cell and synthesize the result back into an image.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hierarchy::{classify, compatible, ClassifyConfig};
use crate::image_io::{compute_histogram, Histogram, RasterImage, RegionSelection};
use crate::lattice_fourier::{
    back_transform, dft2, extract_coefficients, find_lattice, CoefficientSet, ReciprocalBasis,
};
use crate::symmetrize::{point_class, refine_origin_with, symmetrize_plane_group_with, GroupSetting, MetricTolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub n_cells: usize,
    pub k_multiplicity: usize,
    pub fourier_filter_boost: f64,
    pub cip_boost: f64,
    pub resolution_radius: f64,
}

/// K = region area / cell area (at least 1), k = group order. Boosts are sqrt(K) and sqrt(k).
pub fn quality_metrics(region: &RegionSelection, basis: &ReciprocalBasis, group: &GroupSetting) -> QualityReport {
    let k_cells = ((region.pixel_count() as f64 / basis.cell_area()).round() as usize).max(1);
    let k = group.k();
    QualityReport {
        n_cells: k_cells,
        k_multiplicity: k,
        fourier_filter_boost: (k_cells as f64).sqrt(),
        cip_boost: (k as f64).sqrt(),
        resolution_radius: basis.grid as f64 / 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionSpec {
    /// Largest disk centred in the image.
    Centered,
    Full,
    Disk { cx: f64, cy: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CipConfig {
    pub region: RegionSpec,
    pub dynamic_range: f64,
    /// Reciprocal pixels; `None` means Nyquist.
    pub resolution_radius: Option<f64>,
    pub min_peak_snr: f64,
    pub metric: MetricTolerances,
    /// Classify the Laue class first and warn when the group is inconsistent with it.
    pub check_laue: bool,
}

impl Default for CipConfig {
    fn default() -> Self {
        Self {
            region: RegionSpec::Centered,
            dynamic_range: 200.0,
            resolution_radius: None,
            min_peak_snr: 8.0,
            metric: MetricTolerances::default(),
            check_laue: true,
        }
    }
}

impl CipConfig {
    pub fn select(&self, image: &RasterImage) -> Result<RegionSelection> {
        let (w, h) = (image.width(), image.height());
        match self.region {
            RegionSpec::Centered => RegionSelection::centered_disk(w, h),
            RegionSpec::Full => RegionSelection::full(w, h),
            RegionSpec::Disk { cx, cy, radius } => RegionSelection::disk(w, h, (cx, cy), radius),
        }
    }
}

/// Coefficients of a region, as used by both classification and processing.
pub fn translation_average(image: &RasterImage, config: &CipConfig) -> Result<(RegionSelection, CoefficientSet)> {
    let region = config.select(image)?;
    let map = dft2(image, &region)?;
    let basis = find_lattice(&map, config.min_peak_snr)?;
    let radius = config.resolution_radius.unwrap_or(map.size() as f64 / 2.0);
    let set = extract_coefficients(&map, &basis, config.dynamic_range, radius)?;
    Ok((region, set))
}

/// Translation average followed by the full classification.
pub fn classify_image(
    image: &RasterImage,
    config: &CipConfig,
    classify_config: &ClassifyConfig,
) -> Result<(CoefficientSet, crate::hierarchy::ClassificationResult)> {
    let (_, trans) = translation_average(image, config)?;
    let result = classify(&trans, classify_config)?;
    Ok((trans, result))
}

#[derive(Debug, Clone)]
pub struct ProcessOutput {
    pub image: RasterImage,
    pub quality: QualityReport,
    pub before: Histogram,
    pub after: Histogram,
    pub origin: [f64; 2],
    pub symmetrized: CoefficientSet,
    pub warnings: Vec<String>,
}

/// Region -> DFT -> lattice -> coefficients -> origin -> symmetrization -> back-transform.
///
/// The output keeps the input mean; amplitudes are rescaled by the region's share of the
/// DFT window so a translation-periodic input is reproduced at its own contrast.
pub fn process(image: &RasterImage, group: &GroupSetting, config: &CipConfig) -> Result<ProcessOutput> {
    let (region, trans) = translation_average(image, config)?;
    let mut warnings = Vec::new();
    if config.check_laue {
        let cc = ClassifyConfig {
            metric: config.metric,
            ..ClassifyConfig::default()
        };
        let result = classify(&trans, &cc)?;
        let needed = compatible(group);
        if needed.id != result.genuine_laue {
            let laue = point_class(&result.genuine_laue).map_or(result.genuine_laue.as_str(), |c| c.name);
            warnings.push(format!(
                "{} requires Laue class {} but the amplitude map classifies as {laue}; the result may show noise as structure",
                group.name, needed.name
            ));
        }
    }
    let origin = refine_origin_with(&trans, group, &config.metric)?;
    log::debug!("origin for {}: {:?}, phase residual {:.3e}", group.name, origin.shift, origin.phase_residual);
    let sym = symmetrize_plane_group_with(&trans.shifted(origin.shift), group, &config.metric)?;
    let mut sym = sym.shifted([-origin.shift[0], -origin.shift[1]]);
    let window = sym.window.map_or(1, |w| w.size);
    let fraction = region.pixel_count() as f64 / (window * window) as f64;
    sym.scale /= fraction;
    let mean = compute_histogram(image, Some(&region))?.mean;
    let out = back_transform(&sym, (image.width(), image.height()), mean)?;
    let basis = sym.basis.expect("extracted sets carry a basis");
    let mut quality = quality_metrics(&region, &basis, group);
    quality.resolution_radius = trans.resolution_radius;
    Ok(ProcessOutput {
        before: compute_histogram(image, None)?,
        after: compute_histogram(&out, None)?,
        image: out,
        quality,
        origin: origin.shift,
        symmetrized: sym,
        warnings,
    })
}
