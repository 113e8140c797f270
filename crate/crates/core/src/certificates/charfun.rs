//! Approximate characteristic functions: interval indicators smoothed by the
//! Fejér kernel, which leaves a trigonometric polynomial of degree `phi`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::fejer_weight;
use super::trigpoly::TrigPoly;

/// `chi_[a, a+len] * F_phi`, i.e. the Fourier coefficients of the indicator
/// damped by the Fejér weights.
pub fn approx_char_len(a: f64, len: f64, phi: usize) -> TrigPoly {
    TrigPoly::from_fn(phi, |k| {
        if k == 0 {
            return Complex64::new(len, 0.0);
        }
        let w = 2.0 * PI * k as f64;
        let hat = (Complex64::from_polar(1.0, -w * a) - Complex64::from_polar(1.0, -w * (a + len))) / Complex64::new(0.0, w);
        hat * fejer_weight(k, phi)
    })
}

/// Approximate characteristic function of the arc from `a` to `b` in the
/// positive direction. Equal endpoints denote the full circle.
pub fn approx_char(a: f64, b: f64, phi: usize) -> TrigPoly {
    let len = (b - a).rem_euclid(1.0);
    approx_char_len(a, if len == 0.0 { 1.0 } else { len }, phi)
}

/// Lower bound on `int_a^b chi / len` for arcs longer than `1 / (phi + 1)`:
/// `max(13/20, 1 - (5 + log(2 pi (phi+1) len)) / (pi^2 (phi+1) len))`.
pub fn char_integral_bound(len: f64, phi: usize) -> f64 {
    let p = phi as f64 + 1.0;
    let tail = 1.0 - (5.0 + (2.0 * PI * p * len).ln()) / (PI * PI * p * len);
    tail.max(13.0 / 20.0)
}
