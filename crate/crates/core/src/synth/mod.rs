//! Synthetic 2D crystal patterns with exact or deliberately broken symmetry, and noise
//! injectors.

mod motif;
mod noise;
mod trio;

pub use motif::{generate_pattern, lattice_for, Blob, LatticeRequest, MotifSpec, SynthLattice};
pub use noise::{add_gaussian_noise, add_spread_noise, apply_noise, NoiseSpec};
pub use trio::{generate_trio, random_motif, Trio, TrioSpec};
