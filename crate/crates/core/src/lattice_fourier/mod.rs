//! DFT of a selected region, reciprocal lattice detection and coefficient extraction.

mod coefficients;
mod lattice;
mod spectral;

pub use coefficients::{
    back_transform, extract_coefficients, CoefficientSet, FourierCoefficient, Index, Window, NORMALIZED_MAX,
};
pub use lattice::{detect_peaks, find_lattice, find_lattice_detailed, DirectBasis, LatticeFit, Peak, ReciprocalBasis};
pub use spectral::{dft2, SpectralMap};

pub(crate) use spectral::fft2_inplace;
