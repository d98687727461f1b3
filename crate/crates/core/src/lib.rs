//! Plane-group and Laue-class symmetry classification of 2D periodic images, with
//! genuine/pseudosymmetry discrimination by geometric AIC and crystallographic image
//! processing.

pub mod cip;
pub mod error;
pub mod gaic;
pub mod hierarchy;
pub mod image_io;
pub mod lattice_fourier;
pub mod symmetrize;
pub mod synth;

pub use error::{Error, Result};
