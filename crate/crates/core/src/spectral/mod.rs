//! Torus discretization, transforms, norms, the fractional kinetic
//! multiplier, and band projection.

mod band;
mod grid;
mod kinetic;
mod state;

pub use band::{band_project, BandWindow};
pub use grid::{make_grid, Representation, SpectralGrid};
pub use kinetic::KineticOperator;
pub use state::WaveFunction;
