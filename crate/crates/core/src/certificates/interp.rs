//! Sign-interpolating trigonometric polynomials
//! `g(t) = sum_i alpha_i F(t - t_i) + beta_i F'(t - t_i)` with `g(t_i) = s_i`,
//! `g'(t_i) = 0`, and sampled verification of their quadratic bounds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::kernel::{fejer, fejer_weight};
use super::trigpoly::TrigPoly;
use crate::error::{Error, Result};
use crate::torus::{cyclic_dist, cyclic_min_gap};

/// Tolerance on `|g(t_i) - s_i|` after the solve.
pub const VALUE_TOL: f64 = 1e-9;
/// Tolerance on `|g'(t_i)|`, multiplied by `phi + 1`.
pub const SLOPE_TOL: f64 = 1e-7;

/// The scaled interpolation system `M V = W` and its solution.
///
/// Unknowns are scaled as `V = ((phi+1) alpha, c1 beta)` and the slope rows by
/// `-(phi+1) / c1` so that `M` is symmetric with diagonal close to one:
///
/// ```text
/// M = [  D0/(phi+1)   D1/c1 ]     c1 = sqrt(2/3) pi (phi+1)^2
///     [ -D1/c1       -D2/c2 ]     c2 = (2/3) pi^2 (phi+1)^3
/// ```
#[derive(Debug, Clone)]
pub struct CoefficientSystem {
    pub phi: usize,
    pub points: Vec<f64>,
    pub signs: Vec<i8>,
    pub d0: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `min_i |M_ii| - sum_{j != i} |M_ij|`.
    pub dominance_margin: f64,
    /// `||V - W||_inf`.
    pub deviation: f64,
    /// Minimum cyclic gap of the points.
    pub delta: f64,
}

fn scales(phi: usize) -> (f64, f64, f64) {
    let p = phi as f64 + 1.0;
    (p, (2.0f64 / 3.0).sqrt() * PI * p * p, 2.0 / 3.0 * PI * PI * p.powi(3))
}

/// Assembles and solves the interpolation system for `g(t_i) = s_i`, `g'(t_i) = 0`.
pub fn solve_sign_interpolation(points: &[f64], signs: &[i8], phi: usize) -> Result<CoefficientSystem> {
    if points.len() != signs.len() {
        return Err(Error::Domain("points and signs differ in length".into()));
    }
    if signs.iter().any(|s| !(-1..=1).contains(s)) {
        return Err(Error::Domain("signs must lie in {-1, 0, 1}".into()));
    }
    if phi == 0 {
        return Err(Error::Domain("cutoff must be positive".into()));
    }
    let delta = cyclic_min_gap(points)?;
    let n = points.len();
    if n > 1 && delta == 0.0 {
        return Err(Error::Separation {
            margin: f64::NEG_INFINITY,
            delta,
            phi,
        });
    }

    let mut d0 = DMatrix::zeros(n, n);
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    for l in 0..n {
        d0[(l, l)] = fejer(0.0, phi, 0)?;
        d2[(l, l)] = fejer(0.0, phi, 2)?;
        for i in l + 1..n {
            let t = points[l] - points[i];
            d0[(l, i)] = fejer(t, phi, 0)?;
            d0[(i, l)] = d0[(l, i)];
            d1[(l, i)] = fejer(t, phi, 1)?;
            d1[(i, l)] = -d1[(l, i)];
            d2[(l, i)] = fejer(t, phi, 2)?;
            d2[(i, l)] = d2[(l, i)];
        }
    }

    let (p, c1, c2) = scales(phi);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(&d0 / p));
    m.view_mut((0, n), (n, n)).copy_from(&(&d1 / c1));
    m.view_mut((n, 0), (n, n)).copy_from(&(-&d1 / c1));
    m.view_mut((n, n), (n, n)).copy_from(&(-&d2 / c2));

    let dominance_margin = (0..2 * n)
        .map(|r| {
            let off: f64 = (0..2 * n).filter(|&c| c != r).map(|c| m[(r, c)].abs()).sum();
            m[(r, r)].abs() - off
        })
        .fold(f64::INFINITY, f64::min);
    if dominance_margin <= 0.0 {
        return Err(Error::Separation {
            margin: dominance_margin,
            delta,
            phi,
        });
    }

    let mut w = DVector::zeros(2 * n);
    for (i, &s) in signs.iter().enumerate() {
        w[i] = s as f64;
    }
    let v = m.clone().lu().solve(&w).ok_or(Error::Separation {
        margin: dominance_margin,
        delta,
        phi,
    })?;
    let alpha = (0..n).map(|i| v[i] / p).collect();
    let beta = (0..n).map(|i| v[n + i] / c1).collect();
    let deviation = (&v - &w).amax();

    let system = CoefficientSystem {
        phi,
        points: points.to_vec(),
        signs: signs.to_vec(),
        d0,
        d1,
        d2,
        m,
        v,
        w,
        alpha,
        beta,
        dominance_margin,
        deviation,
        delta,
    };
    let (value_err, slope_err) = system.residuals();
    if value_err > VALUE_TOL || slope_err > SLOPE_TOL * p {
        return Err(Error::CertificateFailure {
            condition: "interpolation residual".into(),
            excess: (value_err - VALUE_TOL).max(slope_err - SLOPE_TOL * p),
            location: format!("value error {value_err:.3e}, slope error {slope_err:.3e}"),
        });
    }
    Ok(system)
}

impl CoefficientSystem {
    /// The interpolant as a trigonometric polynomial of degree `phi`.
    pub fn poly(&self) -> TrigPoly {
        TrigPoly::from_fn(self.phi, |k| {
            let w = 2.0 * PI * k as f64;
            let sum: Complex64 = self
                .points
                .iter()
                .zip(self.alpha.iter().zip(&self.beta))
                .map(|(&t, (&a, &b))| Complex64::new(a, b * w) * Complex64::from_polar(1.0, -w * t))
                .sum();
            sum * fejer_weight(k, self.phi)
        })
    }

    /// Largest `|g(t_i) - s_i|` and `|g'(t_i)|`, evaluated from the kernel
    /// samples rather than the assembled matrix.
    pub fn residuals(&self) -> (f64, f64) {
        let g = self.poly();
        let mut value: f64 = 0.0;
        let mut slope: f64 = 0.0;
        for (&t, &s) in self.points.iter().zip(&self.signs) {
            value = value.max((g.eval(t) - s as f64).abs());
            slope = slope.max(g.eval_derivative(t, 1).abs());
        }
        (value, slope)
    }

    /// `||V - W||_inf * delta^2 * (phi+1)^2`, the constant in the deviation estimate.
    pub fn deviation_constant(&self) -> f64 {
        let p = self.phi as f64 + 1.0;
        self.deviation * self.delta.powi(2) * p * p
    }
}

/// Worst-case slacks of the verified inequalities on the sample grid. All are
/// nonnegative when the bounds hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMargins {
    /// `min (1 - kappa R^2 - |g|)` away from the points.
    pub outside: f64,
    /// `min (1 - kappa d^2 - |g|)` within `R` of a point; implies `s_i g <= 1 - kappa d^2`.
    pub near: f64,
    /// `min (eta d^2 - |g - s_i|)` within `R` of a point.
    pub deviation: f64,
    /// `1 + 1e-9 - max |g|`.
    pub sup: f64,
}

impl BoundMargins {
    pub fn min(&self) -> f64 {
        self.outside.min(self.near).min(self.deviation).min(self.sup)
    }
}

/// Measured constants of the quadratic bounds on a sample grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialBounds {
    pub phi: usize,
    pub r: f64,
    pub kappa: f64,
    pub eta: f64,
    pub max_abs: f64,
    pub margins: BoundMargins,
    pub samples: usize,
}

impl PolynomialBounds {
    /// `R (phi + 1)`.
    pub fn c2(&self) -> f64 {
        self.r * (self.phi as f64 + 1.0)
    }

    /// `eta / (phi + 1)^2`.
    pub fn c3(&self) -> f64 {
        self.eta / (self.phi as f64 + 1.0).powi(2)
    }

    /// `kappa / (phi + 1)^2`.
    pub fn c4(&self) -> f64 {
        self.kappa / (self.phi as f64 + 1.0).powi(2)
    }

    pub fn holds(&self) -> bool {
        self.margins.min() >= 0.0
    }
}

/// Samples per unit length used by every verification grid, per unit of `phi + 1`.
pub const SAMPLES_PER_BAND: usize = 64;
/// Sup-norm tolerance.
pub const SUP_TOL: f64 = 1e-9;
/// Samples closer than this to a point are skipped in the quotient bounds,
/// where `1 - |g|` is of the order of the interpolation residual.
pub const MIN_QUOTIENT_DIST: f64 = 1e-4;
/// Reported constants are backed off by this factor so that margins are
/// strictly positive.
const BACKOFF: f64 = 1e-3;

/// Uniform grid of `SAMPLES_PER_BAND (phi+1)` points plus the given points.
pub fn sample_grid(phi: usize, points: &[f64]) -> Vec<f64> {
    let n = SAMPLES_PER_BAND * (phi + 1);
    let mut ts: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
    ts.extend_from_slice(points);
    ts
}

/// Index of the nearest point and the distance to it.
pub fn nearest(points: &[f64], t: f64) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| (i, cyclic_dist(t, p)))
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

struct Sample {
    value: f64,
    sign: f64,
    dist: f64,
}

fn samples(system: &CoefficientSystem) -> Result<Vec<Sample>> {
    let g = system.poly();
    let mut out = Vec::new();
    for t in sample_grid(system.phi, &system.points) {
        let value = g.eval(t);
        if value.abs() > 1.0 + SUP_TOL {
            return Err(Error::CertificateFailure {
                condition: "|g| <= 1".into(),
                excess: value.abs() - 1.0,
                location: format!("t = {t:.6}"),
            });
        }
        let (i, dist) = nearest(&system.points, t);
        out.push(Sample {
            value,
            sign: system.signs[i] as f64,
            dist,
        });
    }
    Ok(out)
}

/// Best `kappa` and `eta` at a fixed radius.
fn constants_at(samples: &[Sample], r: f64) -> (f64, f64) {
    let mut kappa = f64::INFINITY;
    let mut eta: f64 = 0.0;
    for s in samples {
        if s.dist > r {
            kappa = kappa.min((1.0 - s.value.abs()) / (r * r));
        } else if s.dist >= MIN_QUOTIENT_DIST {
            let d2 = s.dist * s.dist;
            kappa = kappa.min((1.0 - s.value.abs()) / d2);
            eta = eta.max((s.value - s.sign).abs() / d2);
        }
    }
    (kappa, eta)
}

fn margins_at(samples: &[Sample], r: f64, kappa: f64, eta: f64) -> BoundMargins {
    let mut m = BoundMargins {
        outside: f64::INFINITY,
        near: f64::INFINITY,
        deviation: f64::INFINITY,
        sup: f64::INFINITY,
    };
    for s in samples {
        m.sup = m.sup.min(1.0 + SUP_TOL - s.value.abs());
        if s.dist > r {
            m.outside = m.outside.min(1.0 - kappa * r * r - s.value.abs());
        } else if s.dist >= MIN_QUOTIENT_DIST {
            let d2 = s.dist * s.dist;
            m.near = m.near.min(1.0 - kappa * d2 - s.value.abs());
            m.deviation = m.deviation.min(eta * d2 - (s.value - s.sign).abs());
        }
    }
    m
}

fn finish(system: &CoefficientSystem, samples: &[Sample], r: f64) -> Result<PolynomialBounds> {
    let (kappa, eta) = constants_at(samples, r);
    if !(kappa > 0.0) {
        return Err(Error::CertificateFailure {
            condition: "quadratic decay".into(),
            excess: -kappa,
            location: format!("R = {r:.6}"),
        });
    }
    let kappa = kappa * (1.0 - BACKOFF);
    let eta = eta * (1.0 + BACKOFF);
    Ok(PolynomialBounds {
        phi: system.phi,
        r,
        kappa,
        eta,
        max_abs: samples.iter().map(|s| s.value.abs()).fold(0.0, f64::max),
        margins: margins_at(samples, r, kappa, eta),
        samples: samples.len(),
    })
}

/// Radii tried by [`verify_polynomial_bounds`]: `j / (16 (phi+1))` for
/// `j = 1..=16`, restricted to `R < delta / 2` so the balls stay disjoint.
pub fn radius_ladder(phi: usize, delta: f64) -> Vec<f64> {
    let p = phi as f64 + 1.0;
    (1..=16)
        .map(|j| j as f64 / (16.0 * p))
        .filter(|&r| r < delta / 2.0)
        .collect()
}

/// Samples `g` on a grid of `64 (phi+1)` points and measures `R`, `kappa`, `eta`
/// for the bounds
///
/// ```text
/// |g| <= 1 - kappa R^2            away from the points
/// |g(t)| <= 1 - kappa d(t)^2      within R of t_i
/// |g(t) - s_i| <= eta d(t)^2      within R of t_i
/// ```
///
/// The radius is chosen from [`radius_ladder`] to maximize `kappa R^2`. This
/// is a sampled check of continuum inequalities.
pub fn verify_polynomial_bounds(system: &CoefficientSystem) -> Result<PolynomialBounds> {
    let samples = samples(system)?;
    let ladder = radius_ladder(system.phi, system.delta);
    let mut best: Option<(f64, f64)> = None;
    for &r in &ladder {
        let (kappa, _) = constants_at(&samples, r);
        let score = kappa * r * r;
        if kappa > 0.0 && best.is_none_or(|(s, _)| score >= s) {
            best = Some((score, r));
        }
    }
    let r = match best {
        Some((_, r)) => r,
        None => {
            return Err(Error::CertificateFailure {
                condition: "quadratic decay".into(),
                excess: 0.0,
                location: format!("no admissible radius below delta/2 = {:.6}", system.delta / 2.0),
            })
        }
    };
    finish(system, &samples, r)
}

/// Same as [`verify_polynomial_bounds`] at a prescribed radius.
pub fn bounds_at_radius(system: &CoefficientSystem, r: f64) -> Result<PolynomialBounds> {
    if !(r > 0.0) || r >= system.delta / 2.0 {
        return Err(Error::Domain(format!("radius {r} outside (0, delta/2)")));
    }
    let samples = samples(system)?;
    finish(system, &samples, r)
}
