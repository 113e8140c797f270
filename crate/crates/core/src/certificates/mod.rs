//! Fejér-kernel dual certificates and their sampled verification.

pub mod charfun;
pub mod dual;
pub mod interp;
pub mod kernel;
pub mod trigpoly;

pub use charfun::{approx_char, approx_char_len, char_integral_bound};
pub use dual::{
    build_certificate_i, build_certificate_ii, build_certificate_iii, CertificateBundle, CertificateI,
    CertificateII, CertificateIII, Margin, SeparableField,
};
pub use interp::{
    bounds_at_radius, solve_sign_interpolation, verify_polynomial_bounds, BoundMargins, CoefficientSystem,
    PolynomialBounds,
};
pub use kernel::{dirichlet, fejer, fejer_envelope_constant, fejer_poly};
pub use trigpoly::TrigPoly;
