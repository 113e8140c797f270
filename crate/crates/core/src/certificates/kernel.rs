//! Dirichlet and Fejér kernels, evaluated through their finite Fourier sums.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::trigpoly::TrigPoly;
use crate::error::{Error, Result};

/// Fejér weight `1 - |k| / (phi + 1)`.
pub fn fejer_weight(k: i64, phi: usize) -> f64 {
    1.0 - k.unsigned_abs() as f64 / (phi as f64 + 1.0)
}

/// `j`-th derivative of the Fejér kernel `F_phi` at `t`, for `j <= 4`.
pub fn fejer(t: f64, phi: usize, j: u32) -> Result<f64> {
    if j > 4 {
        return Err(Error::UnsupportedOrder(j));
    }
    if j == 0 && t == 0.0 {
        return Ok(phi as f64 + 1.0);
    }
    let mut acc = if j == 0 { 1.0 } else { 0.0 };
    for k in 1..=phi as i64 {
        let w = 2.0 * PI * k as f64;
        // (i w)^j e^{i w t} + conj = 2 w^j Re(i^j e^{i w t})
        let phase = match j % 4 {
            0 => (w * t).cos(),
            1 => -(w * t).sin(),
            2 => -(w * t).cos(),
            _ => (w * t).sin(),
        };
        acc += 2.0 * fejer_weight(k, phi) * w.powi(j as i32) * phase;
    }
    Ok(acc)
}

/// The Fejér kernel as a [`TrigPoly`] of degree `phi`.
pub fn fejer_poly(phi: usize) -> TrigPoly {
    TrigPoly::from_fn(phi, |k| Complex64::new(fejer_weight(k, phi), 0.0))
}

/// Dirichlet kernel `D_k(t) = sum_{|l| <= k} exp(2 pi i l t)`.
pub fn dirichlet(t: f64, k: usize) -> f64 {
    1.0 + 2.0 * (1..=k).map(|l| (2.0 * PI * l as f64 * t).cos()).sum::<f64>()
}

/// Closed form `(sin((phi+1) pi t) / sin(pi t))^2 / (phi + 1)`, valid away from integers.
pub fn fejer_closed_form(t: f64, phi: usize) -> f64 {
    let p = phi as f64 + 1.0;
    ((p * PI * t).sin() / (PI * t).sin()).powi(2) / p
}

/// Smallest `C` with `|F^(j)(t)| <= C min((phi+1)^(j+1), (phi+1)^(j-1) / sin^2(pi t))`
/// on `samples` equispaced points of the torus.
pub fn fejer_envelope_constant(phi: usize, j: u32, samples: usize) -> Result<f64> {
    let p = phi as f64 + 1.0;
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let t = s as f64 / samples as f64;
        let value = fejer(t, phi, j)?.abs();
        let near = p.powi(j as i32 + 1);
        let sin2 = (PI * t).sin().powi(2);
        let envelope = if sin2 > 0.0 { near.min(p.powi(j as i32 - 1) / sin2) } else { near };
        worst = worst.max(value / envelope);
    }
    Ok(worst)
}
