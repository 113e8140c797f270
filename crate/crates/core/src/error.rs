use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jump coordinate {index}/{grid_points} is not aligned with a {n_pixels}-pixel grid")]
    Alignment {
        index: usize,
        grid_points: usize,
        n_pixels: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cutoff {phi} aliases on a {n_pixels}-pixel grid (need 2*phi+1 <= n_pixels)")]
    Aliasing { phi: usize, n_pixels: usize },

    #[error("solver configuration: {0}")]
    Config(String),

    #[error("unsupported derivative order {0} (0..=4 supported)")]
    UnsupportedOrder(u32),

    /// Interpolation system is not diagonally dominant; points are too close
    /// for the cutoff.
    #[error("insufficient separation: dominance margin {margin:.4e} (delta = {delta:.4}, phi = {phi})")]
    Separation { margin: f64, delta: f64, phi: usize },

    #[error("certificate failure: {condition} violated by {excess:.3e} at {location}")]
    CertificateFailure {
        condition: String,
        excess: f64,
        location: String,
    },

    #[error("block image violates the consistent gradient direction assumption ({0} offending segments)")]
    Precondition(usize),

    #[error("no jump points with separation in [{lo}, {hi}] after {attempts} attempts")]
    Infeasible { lo: f64, hi: f64, attempts: usize },

    #[error("value assignment gave up after {corrections} corrections at cell ({m}, {n})")]
    GenerationFailure {
        corrections: usize,
        m: usize,
        n: usize,
    },

    #[error("no neighbouring swap breaks the gradient sign consistency")]
    TransformationFailure,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
