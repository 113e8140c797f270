//! The truncated Fourier measurement operator, its adjoint and measurement noise.
//!
//! Coefficients are normalized so that `coeff(0, 0)` is the image mean:
//! `coeff(k) = n^-2 * sum_p u(p) exp(-2 pi i p.k / n)`. The adjoint synthesizes
//! `sum_k w_k exp(2 pi i x.k)` at the pixel nodes without normalization, which
//! makes the pair adjoint for the `L^2` pairing `h^2 * sum_p u(p) v(p)`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::torus::{Image, TorusGrid};

/// Fourier coefficients on the frequency box `|k|_inf <= phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    phi: usize,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

impl SpectralData {
    pub fn zeros(phi: usize) -> Self {
        let side = 2 * phi + 1;
        Self {
            phi,
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
            hermitian: true,
        }
    }

    /// Wraps raw coefficients stored row-major in `(k1, k2)`, both running from
    /// `-phi` to `phi`. The hermitian flag is detected.
    pub fn from_coeffs(phi: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let side = 2 * phi + 1;
        if coeffs.len() != side * side {
            return Err(Error::Domain(format!(
                "expected {} coefficients for phi = {phi}, got {}",
                side * side,
                coeffs.len()
            )));
        }
        let mut data = Self {
            phi,
            coeffs,
            hermitian: false,
        };
        data.hermitian = data.hermitian_defect() <= 1e-12 * data.max_abs().max(f64::MIN_POSITIVE);
        Ok(data)
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn side(&self) -> usize {
        2 * self.phi + 1
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    #[inline]
    fn offset(&self, k1: i64, k2: i64) -> usize {
        let p = self.phi as i64;
        debug_assert!(k1.abs() <= p && k2.abs() <= p);
        ((k1 + p) as usize) * self.side() + (k2 + p) as usize
    }

    #[inline]
    pub fn get(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeffs[self.offset(k1, k2)]
    }

    /// Sets a coefficient and clears the hermitian flag; call
    /// [`SpectralData::symmetrize`] or [`SpectralData::set_pair`] to restore it.
    pub fn set(&mut self, k1: i64, k2: i64, value: Complex64) {
        let o = self.offset(k1, k2);
        self.coeffs[o] = value;
        self.hermitian = false;
    }

    /// Sets `coeff(k) = value` and `coeff(-k) = conj(value)`.
    pub fn set_pair(&mut self, k1: i64, k2: i64, value: Complex64) {
        let (a, b) = (self.offset(k1, k2), self.offset(-k1, -k2));
        if a == b {
            self.coeffs[a] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[a] = value;
            self.coeffs[b] = value.conj();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (i64, i64)> {
        let p = self.phi as i64;
        (-p..=p).flat_map(move |k1| (-p..=p).map(move |k2| (k1, k2)))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|coeff(-k) - conj(coeff(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.frequencies()
            .map(|(k1, k2)| (self.get(-k1, -k2) - self.get(k1, k2).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces the coefficients by their hermitian part
    /// `(c(k) + conj(c(-k))) / 2`, the spectrum of the real part of the
    /// synthesized field.
    pub fn symmetrize(&mut self) {
        let old = self.coeffs.clone();
        let p = self.phi as i64;
        let side = self.side();
        for k1 in -p..=p {
            for k2 in -p..=p {
                let a = ((k1 + p) as usize) * side + (k2 + p) as usize;
                let b = ((-k1 + p) as usize) * side + (-k2 + p) as usize;
                self.coeffs[a] = (old[a] + old[b].conj()) * 0.5;
            }
        }
        self.hermitian = true;
    }

    /// Squared Euclidean norm over all coefficients.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn dist_sqr(&self, other: &SpectralData) -> f64 {
        assert_eq!(self.phi, other.phi);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    /// Real inner product `Re sum_k a_k conj(b_k)`.
    pub fn inner(&self, other: &SpectralData) -> f64 {
        assert_eq!(self.phi, other.phi);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn scaled(&self, s: f64) -> SpectralData {
        SpectralData {
            phi: self.phi,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            hermitian: self.hermitian,
        }
    }

    /// CSV with a `# phi=<phi>` header line and rows `k1,k2,re,im` sorted by
    /// `(k1, k2)`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# phi={}\nk1,k2,re,im\n", self.phi);
        for (k1, k2) in self.frequencies() {
            let c = self.get(k1, k2);
            let _ = writeln!(out, "{k1},{k2},{:?},{:?}", c.re, c.im);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut phi = None;
        let mut rows = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix("# phi=") {
                phi = Some(rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: k + 1,
                    msg: "bad phi".into(),
                })?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') || line.starts_with("k1") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |msg: &str| Error::Parse {
                line: k + 1,
                msg: msg.to_string(),
            };
            if fields.len() != 4 {
                return Err(bad("expected k1,k2,re,im"));
            }
            let k1: i64 = fields[0].parse().map_err(|_| bad("bad k1"))?;
            let k2: i64 = fields[1].parse().map_err(|_| bad("bad k2"))?;
            let re: f64 = fields[2].parse().map_err(|_| bad("bad re"))?;
            let im: f64 = fields[3].parse().map_err(|_| bad("bad im"))?;
            rows.push((k1, k2, Complex64::new(re, im)));
        }
        let phi = phi.ok_or(Error::Parse {
            line: 1,
            msg: "missing `# phi=` header".into(),
        })?;
        let mut data = SpectralData::zeros(phi);
        let p = phi as i64;
        for (k1, k2, c) in rows {
            if k1.abs() > p || k2.abs() > p {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("frequency ({k1}, {k2}) outside |k| <= {phi}"),
                });
            }
            let o = data.offset(k1, k2);
            data.coeffs[o] = c;
        }
        SpectralData::from_coeffs(phi, data.coeffs)
    }
}

/// Noise level and seed for [`add_noise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Target of `E[|f_delta - f|^2] / 2`.
    pub delta: f64,
    pub seed: u64,
}

fn check_cutoff(phi: usize, grid: TorusGrid) -> Result<()> {
    if 2 * phi + 1 > grid.n_pixels() {
        return Err(Error::Aliasing {
            phi,
            n_pixels: grid.n_pixels(),
        });
    }
    Ok(())
}

/// Separable real FFT restricted to the low-frequency box. Holds plans and
/// scratch so that repeated transforms (one pair per solver iteration) do not
/// allocate.
pub struct LowPass {
    n: usize,
    phi: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    row_real: Vec<f64>,
    row_spec: Vec<Complex64>,
    r_scratch: Vec<Complex64>,
    c_scratch: Vec<Complex64>,
    /// `(phi + 1)` columns of length `n`, indexed `[k1 * n + j]`.
    columns: Vec<Complex64>,
}

impl LowPass {
    pub fn new(grid: TorusGrid, phi: usize) -> Result<Self> {
        check_cutoff(phi, grid)?;
        let n = grid.n_pixels();
        let mut rp = RealFftPlanner::<f64>::new();
        let r2c = rp.plan_fft_forward(n);
        let c2r = rp.plan_fft_inverse(n);
        let mut cp = FftPlanner::<f64>::new();
        let fwd = cp.plan_fft_forward(n);
        let inv = cp.plan_fft_inverse(n);
        let scratch_len = r2c
            .get_scratch_len()
            .max(c2r.get_scratch_len());
        let c_scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Ok(Self {
            n,
            phi,
            row_real: vec![0.0; n],
            row_spec: vec![Complex64::new(0.0, 0.0); n / 2 + 1],
            r_scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            c_scratch: vec![Complex64::new(0.0, 0.0); c_scratch_len],
            columns: vec![Complex64::new(0.0, 0.0); (phi + 1) * n],
            r2c,
            c2r,
            fwd,
            inv,
        })
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    /// Number of entries of a half spectrum: `(phi + 1) x (2 phi + 1)`.
    pub fn half_len(&self) -> usize {
        (self.phi + 1) * (2 * self.phi + 1)
    }

    /// Unnormalized sums `S(k1, k2) = sum_p u(p) exp(-2 pi i p.k / n)` for
    /// `0 <= k1 <= phi`, `|k2| <= phi`, written to `half[k1 * (2 phi + 1) + k2 + phi]`.
    pub fn analyze_half(&mut self, values: &[f64], half: &mut [Complex64]) {
        let (n, phi) = (self.n, self.phi);
        debug_assert_eq!(values.len(), n * n);
        for j in 0..n {
            self.row_real.copy_from_slice(&values[j * n..(j + 1) * n]);
            self.r2c
                .process_with_scratch(&mut self.row_real, &mut self.row_spec, &mut self.r_scratch)
                .expect("buffer sizes fixed at construction");
            for k1 in 0..=phi {
                self.columns[k1 * n + j] = self.row_spec[k1];
            }
        }
        let side = 2 * phi + 1;
        for k1 in 0..=phi {
            let col = &mut self.columns[k1 * n..(k1 + 1) * n];
            self.fwd.process_with_scratch(col, &mut self.c_scratch);
            for (t, k2) in (-(phi as i64)..=phi as i64).enumerate() {
                half[k1 * side + t] = col[k2.rem_euclid(n as i64) as usize];
            }
        }
    }

    /// Writes `sum_k w_k exp(2 pi i p.k / n)` into `out`, where `w` is the
    /// hermitian coefficient set whose `k1 >= 0` half is given in `half`.
    pub fn synthesize_half(&mut self, half: &[Complex64], out: &mut [f64]) {
        let (n, phi) = (self.n, self.phi);
        let side = 2 * phi + 1;
        for k1 in 0..=phi {
            let col = &mut self.columns[k1 * n..(k1 + 1) * n];
            col.fill(Complex64::new(0.0, 0.0));
            for (t, k2) in (-(phi as i64)..=phi as i64).enumerate() {
                col[k2.rem_euclid(n as i64) as usize] = half[k1 * side + t];
            }
            self.inv.process_with_scratch(col, &mut self.c_scratch);
        }
        for j in 0..n {
            self.row_spec.fill(Complex64::new(0.0, 0.0));
            for k1 in 0..=phi {
                self.row_spec[k1] = self.columns[k1 * n + j];
            }
            self.row_spec[0].im = 0.0;
            self.c2r
                .process_with_scratch(&mut self.row_spec, &mut out[j * n..(j + 1) * n], &mut self.r_scratch)
                .expect("buffer sizes fixed at construction");
        }
    }
}

/// Expands a `k1 >= 0` half spectrum to the full hermitian box.
fn expand_half(phi: usize, half: &[Complex64], scale: f64) -> SpectralData {
    let side = 2 * phi + 1;
    let p = phi as i64;
    let mut data = SpectralData::zeros(phi);
    for k1 in 0..=p {
        for k2 in -p..=p {
            let c = half[k1 as usize * side + (k2 + p) as usize] * scale;
            if k1 > 0 || k2 >= 0 {
                data.set_pair(k1, k2, c);
            }
        }
    }
    data.hermitian = true;
    data
}

fn half_of(data: &SpectralData) -> Vec<Complex64> {
    let p = data.phi as i64;
    (0..=p)
        .flat_map(|k1| (-p..=p).map(move |k2| (k1, k2)))
        .map(|(k1, k2)| data.get(k1, k2))
        .collect()
}

/// Normalized Fourier coefficients of `u` on `|k|_inf <= phi`.
pub fn forward(u: &Image, phi: usize) -> Result<SpectralData> {
    let grid = u.grid();
    let mut lp = LowPass::new(grid, phi)?;
    let mut half = vec![Complex64::new(0.0, 0.0); lp.half_len()];
    lp.analyze_half(u.values(), &mut half);
    Ok(expand_half(phi, &half, 1.0 / grid.len() as f64))
}

/// Samples `sum_k w_k exp(2 pi i (x, y).k)` at the pixel nodes and returns the
/// real part together with the largest imaginary magnitude.
pub fn adjoint(w: &SpectralData, grid: TorusGrid) -> Result<(Image, f64)> {
    if w.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Domain("non-finite coefficient".into()));
    }
    let mut lp = LowPass::new(grid, w.phi)?;
    let mut real_part = w.clone();
    real_part.symmetrize();
    let mut out = vec![0.0; grid.len()];
    lp.synthesize_half(&half_of(&real_part), &mut out);

    let residual = if w.hermitian {
        0.0
    } else {
        // Imaginary part of the synthesis is the synthesis of
        // (c(k) - conj(c(-k))) / (2i), which is again hermitian.
        let mut anti = w.clone();
        for (k1, k2) in w.frequencies() {
            let a = (w.get(k1, k2) - w.get(-k1, -k2).conj()) * Complex64::new(0.0, -0.5);
            let o = anti.offset(k1, k2);
            anti.coeffs[o] = a;
        }
        let mut imag = vec![0.0; grid.len()];
        lp.synthesize_half(&half_of(&anti), &mut imag);
        imag.iter().map(|v| v.abs()).fold(0.0, f64::max)
    };
    Ok((Image::from_raw(grid, out), residual))
}

/// Adds complex Gaussian noise with `E[|f_delta - f|^2] / 2 = delta`.
///
/// Noise is drawn on the closed upper half of the frequency box (the zero
/// frequency real-valued) and mirrored, so the output stays hermitian. Every
/// one of the `(2 phi + 1)^2` coefficients receives noise of expected squared
/// magnitude `2 delta / (2 phi + 1)^2`.
pub fn add_noise(f: &SpectralData, spec: NoiseSpec) -> Result<SpectralData> {
    if !(spec.delta >= 0.0) || !spec.delta.is_finite() {
        return Err(Error::Domain(format!("noise level {} must be finite and >= 0", spec.delta)));
    }
    if !f.hermitian {
        return Err(Error::Domain("noise is added to hermitian data only".into()));
    }
    if spec.delta == 0.0 {
        return Ok(f.clone());
    }
    let count = (f.side() * f.side()) as f64;
    let var = 2.0 * spec.delta / count;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let real = Normal::new(0.0, var.sqrt()).expect("finite variance");
    let complex = Normal::new(0.0, (var / 2.0).sqrt()).expect("finite variance");
    let mut out = f.clone();
    let p = f.phi as i64;
    for k1 in 0..=p {
        for k2 in -p..=p {
            if k1 == 0 && k2 < 0 {
                continue;
            }
            if k1 == 0 && k2 == 0 {
                let o = out.offset(0, 0);
                out.coeffs[o].re += real.sample(&mut rng);
                continue;
            }
            let noise = Complex64::new(complex.sample(&mut rng), complex.sample(&mut rng));
            let (a, b) = (out.offset(k1, k2), out.offset(-k1, -k2));
            out.coeffs[a] += noise;
            out.coeffs[b] += noise.conj();
        }
    }
    out.hermitian = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::PI;

    /// Direct double sum, independent of the FFT path.
    fn naive_forward(u: &Image, phi: usize) -> SpectralData {
        let n = u.grid().n_pixels();
        let mut data = SpectralData::zeros(phi);
        let p = phi as i64;
        for k1 in -p..=p {
            for k2 in -p..=p {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    for i in 0..n {
                        let ang = -2.0 * PI * ((i as i64 * k1 + j as i64 * k2) as f64) / n as f64;
                        acc += Complex64::from_polar(u.at(i, j), ang);
                    }
                }
                data.set(k1, k2, acc / (n * n) as f64);
            }
        }
        data
    }

    fn random_image(grid: TorusGrid, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(grid, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn constant_has_only_mean() {
        let grid = TorusGrid::new(16).unwrap();
        let f = forward(&Image::constant(grid, 2.5), 5).unwrap();
        for (k1, k2) in f.frequencies() {
            let expected = if (k1, k2) == (0, 0) { 2.5 } else { 0.0 };
            assert!((f.get(k1, k2) - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn cosine_mode() {
        let grid = TorusGrid::new(12).unwrap();
        let u = Image::from_fn(grid, |i, _| (2.0 * PI * grid.node(i)).cos());
        let f = forward(&u, 3).unwrap();
        for (k1, k2) in f.frequencies() {
            let expected = if k2 == 0 && k1.abs() == 1 { 0.5 } else { 0.0 };
            assert!((f.get(k1, k2) - Complex64::new(expected, 0.0)).norm() < 1e-12, "{k1},{k2}");
        }
    }

    #[test]
    fn matches_naive_sum() {
        for (n, phi) in [(8, 2), (9, 4), (10, 3)] {
            let grid = TorusGrid::new(n).unwrap();
            let u = random_image(grid, n as u64);
            let fast = forward(&u, phi).unwrap();
            let slow = naive_forward(&u, phi);
            assert!(fast.dist_sqr(&slow).sqrt() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn aliasing_rejected() {
        let grid = TorusGrid::new(8).unwrap();
        assert!(matches!(forward(&Image::zeros(grid), 4), Err(Error::Aliasing { .. })));
        assert!(forward(&Image::zeros(grid), 3).is_ok());
    }

    #[test]
    fn adjoint_simple_cases() {
        let grid = TorusGrid::new(10).unwrap();
        let (img, res) = adjoint(&SpectralData::zeros(3), grid).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));
        assert_eq!(res, 0.0);
        let mut w = SpectralData::zeros(3);
        w.set_pair(0, 0, Complex64::new(1.0, 0.0));
        let (img, _) = adjoint(&w, grid).unwrap();
        assert!(img.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn adjoint_reports_imaginary_residual() {
        let grid = TorusGrid::new(10).unwrap();
        let mut w = SpectralData::zeros(2);
        w.set(1, 0, Complex64::new(1.0, 0.0));
        let (img, res) = adjoint(&w, grid).unwrap();
        // Real part of exp(2 pi i x) is cos, imaginary part sin with peak ~1.
        assert!((img.at(0, 0) - 1.0).abs() < 1e-12);
        assert!(res > 0.9 && res <= 1.0 + 1e-12);
    }

    #[test]
    fn adjoint_pairing_random() {
        let grid = TorusGrid::new(24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for phi in [2usize, 5, 11] {
            let u = random_image(grid, phi as u64);
            let mut w = SpectralData::zeros(phi);
            let p = phi as i64;
            for k1 in 0..=p {
                for k2 in -p..=p {
                    if k1 > 0 || k2 >= 0 {
                        w.set_pair(k1, k2, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                    }
                }
            }
            let lhs = forward(&u, phi).unwrap().inner(&w);
            let (kw, _) = adjoint(&w, grid).unwrap();
            let h2 = grid.spacing().powi(2);
            let rhs: f64 = h2 * u.values().iter().zip(kw.values()).map(|(a, b)| a * b).sum::<f64>();
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "phi = {phi}");
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let grid = TorusGrid::new(16).unwrap();
        let f = forward(&random_image(grid, 1), 4).unwrap();
        let g = add_noise(&f, NoiseSpec { delta: 0.0, seed: 9 }).unwrap();
        assert_eq!(f, g);
        assert!(add_noise(&f, NoiseSpec { delta: -1.0, seed: 9 }).is_err());
    }

    #[test]
    fn noise_energy_in_expectation() {
        let f = SpectralData::zeros(3);
        let trials = 10_000;
        let mut total = 0.0;
        for seed in 0..trials {
            let g = add_noise(&f, NoiseSpec { delta: 1.0, seed }).unwrap();
            assert!(g.hermitian_defect() == 0.0);
            total += 0.5 * g.dist_sqr(&f);
        }
        let mean = total / trials as f64;
        assert!((0.95..=1.05).contains(&mean), "mean energy {mean}");
    }

    #[test]
    fn noise_is_seeded() {
        let f = SpectralData::zeros(2);
        let a = add_noise(&f, NoiseSpec { delta: 0.3, seed: 5 }).unwrap();
        let b = add_noise(&f, NoiseSpec { delta: 0.3, seed: 5 }).unwrap();
        let c = add_noise(&f, NoiseSpec { delta: 0.3, seed: 6 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn csv_round_trip() {
        let grid = TorusGrid::new(12).unwrap();
        let f = forward(&random_image(grid, 4), 3).unwrap();
        let text = f.to_csv();
        assert!(text.starts_with("# phi=3\n"));
        let back = SpectralData::from_csv(&text).unwrap();
        assert_eq!(back, f);
    }
}
