//! Anisotropic total-variation superresolution of piecewise-constant images
//! from truncated Fourier data on the flat torus.

pub mod block;
pub mod certificates;
pub mod datagen;
pub mod error;
pub mod fourier;
pub mod torus;
pub mod solver;
pub mod tv;

pub use error::{Error, Result};
