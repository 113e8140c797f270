//! Real-valued trigonometric polynomials on `R/Z` held by their Fourier
//! coefficients, so values, derivatives and interval integrals are exact sums.

use std::f64::consts::PI;

use num_complex::Complex64;

/// `p(t) = sum_{|k| <= degree} c_k exp(2 pi i k t)` with `c_{-k} = conj(c_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    degree: usize,
    /// `coeffs[k + degree]` is `c_k`.
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * degree + 1],
        }
    }

    pub fn constant(degree: usize, c: f64) -> Self {
        let mut p = Self::zero(degree);
        p.coeffs[degree] = Complex64::new(c, 0.0);
        p
    }

    /// Builds a polynomial from `f(k)` for `k >= 0`; negative frequencies are
    /// filled in by conjugation.
    pub fn from_fn(degree: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let mut p = Self::zero(degree);
        let d = degree as i64;
        p.coeffs[degree] = Complex64::new(f(0).re, 0.0);
        for k in 1..=d {
            let c = f(k);
            p.coeffs[(d + k) as usize] = c;
            p.coeffs[(d - k) as usize] = c.conj();
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.degree {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.degree as i64) as usize]
    }

    /// Coefficients `c_{-degree}, ..., c_{degree}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_derivative(t, 0)
    }

    /// `j`-th derivative at `t`.
    pub fn eval_derivative(&self, t: f64, j: u32) -> f64 {
        let mut acc = self.coeffs[self.degree].re * if j == 0 { 1.0 } else { 0.0 };
        for k in 1..=self.degree as i64 {
            let c = self.coeffs[(k + self.degree as i64) as usize];
            let w = 2.0 * PI * k as f64;
            let e = Complex64::from_polar(1.0, w * t);
            let factor = Complex64::new(0.0, w).powu(j);
            acc += 2.0 * (c * factor * e).re;
        }
        acc
    }

    /// Values at `t = k / samples` for `k = 0..samples`.
    pub fn sample(&self, samples: usize) -> Vec<f64> {
        (0..samples)
            .map(|k| self.eval(k as f64 / samples as f64))
            .collect()
    }

    /// `int_a^{a + len} p(t) dt`, exact.
    pub fn integral(&self, a: f64, len: f64) -> f64 {
        let mut acc = self.coeffs[self.degree].re * len;
        for k in 1..=self.degree as i64 {
            let c = self.coeffs[(k + self.degree as i64) as usize];
            let w = 2.0 * PI * k as f64;
            let e = Complex64::from_polar(1.0, w * (a + len)) - Complex64::from_polar(1.0, w * a);
            acc += 2.0 * (c * e / Complex64::new(0.0, w)).re;
        }
        acc
    }

    /// `p(t - shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self::from_fn(self.degree, |k| self.coeff(k) * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * shift))
    }

    /// `p'`.
    pub fn derivative(&self) -> Self {
        Self::from_fn(self.degree, |k| self.coeff(k) * Complex64::new(0.0, 2.0 * PI * k as f64))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self += s * other`; degrees must agree.
    pub fn add_scaled(&mut self, other: &TrigPoly, s: f64) {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }
}
