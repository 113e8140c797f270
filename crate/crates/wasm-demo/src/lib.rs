//! WebAssembly bindings for the static page in `www/`.
//!
//! Each operation is a plain Rust function returning `tvsr::Result`, wrapped by
//! a thin `#[wasm_bindgen]` export that turns errors into JS exceptions. The
//! plain functions are what the native tests exercise.

use tvsr::block::BlockImage;
use tvsr::certificates::{approx_char, char_integral_bound, solve_sign_interpolation, verify_polynomial_bounds};
use tvsr::datagen::{assign_values_greedy, instance_rng, sample_jump_points, Bin};
use tvsr::fourier::forward;
use tvsr::solver::{solve, SolverConfig};
use tvsr::torus::TorusGrid;
use tvsr::tv::{aniso_tv, l1_error};
use wasm_bindgen::prelude::*;

fn js(e: tvsr::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Sampled sign interpolant on `[0, 1)` with its verified bounds.
#[wasm_bindgen]
pub struct Interpolant {
    values: Vec<f64>,
    r: f64,
    kappa: f64,
    eta: f64,
    dominance: f64,
    valid: bool,
}

#[wasm_bindgen]
impl Interpolant {
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn r(&self) -> f64 {
        self.r
    }
    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    #[wasm_bindgen(getter)]
    pub fn eta(&self) -> f64 {
        self.eta
    }
    #[wasm_bindgen(getter)]
    pub fn dominance(&self) -> f64 {
        self.dominance
    }
    /// Whether `|g| < 1` away from the points and the quadratic bounds hold.
    #[wasm_bindgen(getter)]
    pub fn valid(&self) -> bool {
        self.valid
    }
}

pub fn interpolant(points: &[f64], signs: &[i8], phi: usize, samples: usize) -> tvsr::Result<Interpolant> {
    let system = solve_sign_interpolation(points, signs, phi)?;
    let values = system.poly().sample(samples.max(2));
    let dominance = system.dominance_margin;
    Ok(match verify_polynomial_bounds(&system) {
        Ok(b) => Interpolant {
            values,
            r: b.r,
            kappa: b.kappa,
            eta: b.eta,
            dominance,
            valid: b.holds(),
        },
        Err(_) => Interpolant {
            values,
            r: f64::NAN,
            kappa: f64::NAN,
            eta: f64::NAN,
            dominance,
            valid: false,
        },
    })
}

#[wasm_bindgen(js_name = signInterpolant)]
pub fn sign_interpolant_js(points: &[f64], signs: &[i8], phi: usize, samples: usize) -> Result<Interpolant, JsError> {
    interpolant(points, signs, phi, samples).map_err(js)
}

/// Samples of the smoothed indicator of the arc `[a, b)` followed by its
/// exact mean and the guaranteed lower bound on the normalized mass.
pub fn smoothed_indicator(a: f64, b: f64, phi: usize, samples: usize) -> Vec<f64> {
    let p = approx_char(a, b, phi);
    let len = (b - a).rem_euclid(1.0);
    let len = if len == 0.0 { 1.0 } else { len };
    let mut out = p.sample(samples.max(2));
    out.push(p.integral(a, len) / len);
    out.push(char_integral_bound(len, phi));
    out
}

#[wasm_bindgen(js_name = smoothedIndicator)]
pub fn smoothed_indicator_js(a: f64, b: f64, phi: usize, samples: usize) -> Vec<f64> {
    smoothed_indicator(a, b, phi, samples)
}

/// A random block image and its reconstruction from frequencies `|k| <= phi`.
#[wasm_bindgen]
pub struct Reconstruction {
    n: usize,
    truth: Vec<f64>,
    recon: Vec<f64>,
    l1: f64,
    tv_truth: f64,
    tv_recon: f64,
    iterations: usize,
    delta: f64,
}

#[wasm_bindgen]
impl Reconstruction {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }
    /// Row-major pixel values, `n * n` of them.
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn recon(&self) -> Vec<f64> {
        self.recon.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn l1(&self) -> f64 {
        self.l1
    }
    #[wasm_bindgen(getter, js_name = tvTruth)]
    pub fn tv_truth(&self) -> f64 {
        self.tv_truth
    }
    #[wasm_bindgen(getter, js_name = tvRecon)]
    pub fn tv_recon(&self) -> f64 {
        self.tv_recon
    }
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    /// Minimum separation of the jump lines.
    #[wasm_bindgen(getter)]
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn row_major(img: &tvsr::torus::Image) -> Vec<f64> {
    let n = img.grid().n_pixels();
    (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).map(|(i, j)| img.at(i, j)).collect()
}

pub fn reconstruct(n: usize, phi: usize, min_sep: f64, seed: u64, max_iters: usize) -> tvsr::Result<Reconstruction> {
    let grid = TorusGrid::new(n)?;
    let bin = Bin::new(min_sep, 0.5)?;
    let mut block: Option<BlockImage> = None;
    for attempt in 0..64 {
        let mut rng = instance_rng(seed, 0, 0, attempt);
        let (xs, ys) = sample_jump_points(bin, n, 6, 10_000, &mut rng)?;
        if let Ok(b) = assign_values_greedy(n, xs, ys, 1000, &mut rng) {
            block = Some(b);
            break;
        }
    }
    let block = block.ok_or(tvsr::Error::Infeasible {
        lo: min_sep,
        hi: 0.5,
        attempts: 64,
    })?;
    let truth = block.rasterize(grid)?;
    let data = forward(&truth, phi)?;
    let cfg = SolverConfig {
        max_iters,
        ..SolverConfig::default()
    };
    let (u, report) = solve(&data, grid, &cfg)?;
    Ok(Reconstruction {
        n,
        l1: l1_error(&u, &truth)?,
        tv_truth: aniso_tv(&truth),
        tv_recon: aniso_tv(&u),
        iterations: report.iterations,
        delta: block.delta(),
        truth: row_major(&truth),
        recon: row_major(&u),
    })
}

#[wasm_bindgen(js_name = reconstruct)]
pub fn reconstruct_js(n: usize, phi: usize, min_sep: f64, seed: u64, max_iters: usize) -> Result<Reconstruction, JsError> {
    reconstruct(n, phi, min_sep, seed, max_iters).map_err(js)
}
