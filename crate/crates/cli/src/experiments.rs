//! Exact-recovery, noise-convergence and cutoff-sweep experiments.

use std::time::Instant;

use rayon::prelude::*;
use tvsr::block::BlockImage;
use tvsr::datagen::{Instance, RecoveryOutcome};
use tvsr::fourier::{add_noise, forward, NoiseSpec};
use tvsr::solver::{exact_recovery_check, solve, SolverConfig};
use tvsr::torus::{Image, TorusGrid};
use tvsr::tv::{aniso_tv, l1_error, levelset_sym_diff};

use crate::error::CliError;

/// Header of the per-run results CSV.
pub const RESULTS_HEADER: &str = "bin,index,delta,phi,exact,l1_error,iterations,wall_seconds,flags";
/// Header of the noisy-run CSV.
pub const CONVERGENCE_HEADER: &str = "image_id,delta_noise,alpha,l1_error,iterations";
/// Header of the cutoff-sweep CSV.
pub const SWEEP_HEADER: &str = "phi,tv,data_residual,iterations,converged";

/// Gray-value tolerance of the exact-recovery test.
pub const EXACT_TOL: f64 = 1e-4;
/// `alpha = C sqrt(delta)` constant for the noisy runs.
pub const C_ALPHA: f64 = 1.0 / 0.028;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub bin: usize,
    pub index: usize,
    pub delta: f64,
    pub phi: usize,
    pub noise_delta: f64,
    pub alpha: f64,
    pub exact: bool,
    pub l1_error: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
    /// `;`-separated, empty when nothing is flagged.
    pub flags: String,
}

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:?},{},{},{:e},{},{:.3},{}",
            self.bin,
            self.index,
            self.delta,
            self.phi,
            self.exact as u8,
            self.l1_error,
            self.iterations,
            self.wall_seconds,
            self.flags
        )
    }

    pub fn outcome(&self) -> RecoveryOutcome {
        RecoveryOutcome {
            bin: self.bin,
            index: self.index,
            exact: self.exact,
        }
    }
}

pub fn results_csv(records: &[ExperimentRecord]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Parses a results CSV written by [`results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ExperimentRecord>, CliError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(RESULTS_HEADER) {
        return Err(CliError::Io("results csv: unexpected header".into()));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || CliError::Io(format!("results csv: bad row {}", k + 2));
        let f: Vec<&str> = line.splitn(9, ',').collect();
        if f.len() != 9 {
            return Err(bad());
        }
        out.push(ExperimentRecord {
            bin: f[0].parse().map_err(|_| bad())?,
            index: f[1].parse().map_err(|_| bad())?,
            delta: f[2].parse().map_err(|_| bad())?,
            phi: f[3].parse().map_err(|_| bad())?,
            noise_delta: 0.0,
            alpha: 0.0,
            exact: f[4] == "1",
            l1_error: f[5].parse().map_err(|_| bad())?,
            iterations: f[6].parse().map_err(|_| bad())?,
            wall_seconds: f[7].parse().map_err(|_| bad())?,
            flags: f[8].to_string(),
        });
    }
    Ok(out)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct RecoveryConfig {
    pub grid: usize,
    pub phis: Vec<usize>,
    pub solver: SolverConfig,
    pub exact_tol: f64,
    pub threads: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            grid: 120,
            phis: vec![12, 18],
            solver: SolverConfig::default(),
            exact_tol: EXACT_TOL,
            threads: 1,
        }
    }
}

fn recover_one(inst: &Instance, grid: TorusGrid, phi: usize, cfg: &RecoveryConfig) -> Result<ExperimentRecord, CliError> {
    let start = Instant::now();
    let truth = inst.block.rasterize(grid)?;
    let f = forward(&truth, phi)?;
    let (u, report) = solve(&f, grid, &SolverConfig { alpha: 0.0, ..cfg.solver.clone() })?;
    let exact = exact_recovery_check(&u, &inst.block, cfg.exact_tol)?;
    Ok(ExperimentRecord {
        bin: inst.bin,
        index: inst.index,
        delta: inst.block.delta(),
        phi,
        noise_delta: 0.0,
        alpha: 0.0,
        exact,
        l1_error: l1_error(&u, &truth)?,
        iterations: report.iterations,
        wall_seconds: start.elapsed().as_secs_f64(),
        flags: if report.converged { String::new() } else { "not_converged".into() },
    })
}

/// One noiseless `alpha = 0` reconstruction per `(instance, phi)`. Rows come
/// back ordered by `phi`, then instance, whatever the thread count.
pub fn run_exact_recovery(instances: &[Instance], cfg: &RecoveryConfig) -> Result<Vec<ExperimentRecord>, CliError> {
    let grid = TorusGrid::new(cfg.grid)?;
    let jobs: Vec<(usize, &Instance)> = cfg.phis.iter().flat_map(|&p| instances.iter().map(move |i| (p, i))).collect();
    pool(cfg.threads)?.install(|| jobs.par_iter().map(|&(phi, inst)| recover_one(inst, grid, phi, cfg)).collect())
}

/// `(bin, runs, exact runs)` for one cutoff, sorted by bin.
pub fn exact_fractions(records: &[ExperimentRecord], phi: usize) -> Vec<(usize, usize, usize)> {
    let mut bins: Vec<(usize, usize, usize)> = Vec::new();
    for r in records.iter().filter(|r| r.phi == phi) {
        match bins.iter_mut().find(|b| b.0 == r.bin) {
            Some(b) => {
                b.1 += 1;
                b.2 += r.exact as usize;
            }
            None => bins.push((r.bin, 1, r.exact as usize)),
        }
    }
    bins.sort_unstable();
    bins
}

/// `count` levels `10^k`, `k` equally spaced in `[lo_exp, hi_exp]`.
pub fn noise_levels(count: usize, lo_exp: f64, hi_exp: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..count)
            .map(|k| 10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / (count - 1) as f64))
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub grid: usize,
    pub phi: usize,
    /// Noise levels of the unnormalized pixel-sum transform; see
    /// [`discrete_scaling`].
    pub levels: Vec<f64>,
    pub c_alpha: f64,
    pub solver: SolverConfig,
    pub seed: u64,
    pub threads: usize,
    /// Range of levels used for the slope fit; `None` fits all of them.
    pub fit_range: Option<(f64, f64)>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            grid: 120,
            phi: 18,
            levels: noise_levels(10, -3.0, 3.0),
            c_alpha: C_ALPHA,
            solver: SolverConfig::default(),
            seed: 1,
            threads: 1,
            fit_range: None,
        }
    }
}

/// Converts a noise level and regularization weight given for unnormalized
/// pixel sums into the normalized coefficients used by the operator:
/// `(delta / n^4, alpha / n^3)` on an `n x n` grid. The pixel-sum transform is
/// `n^2` times ours and its TV is `n` times ours, which rescales the
/// objective by `n`.
pub fn discrete_scaling(delta: f64, alpha: f64, n_pixels: usize) -> (f64, f64) {
    let n = n_pixels as f64;
    (delta / n.powi(4), alpha / n.powi(3))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub image_id: String,
    pub delta_noise: f64,
    pub alpha: f64,
    pub l1_error: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `sup_t |{u >= t} sym-diff {u_true >= t}| dist(t, range u_true)` over a
    /// grid of levels.
    pub levelset_weighted: f64,
}

impl ConvergenceRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{}",
            self.image_id, self.delta_noise, self.alpha, self.l1_error, self.iterations
        )
    }
}

pub fn convergence_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Least-squares line through `(log10 delta, log10 mean error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// `(delta, mean l1 error)` per level.
    pub means: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// `max_i err_i(delta_max) / delta_max^(1/4)`: the `delta^(1/4)` curve
    /// through the worst image at the largest level.
    pub anchor_c: f64,
}

impl RateFit {
    /// Largest `err / (anchor_c delta^(1/4))` over all runs; at most one when
    /// every error lies under the anchored quarter-rate curve.
    pub fn quarter_rate_ratio(&self, records: &[ConvergenceRecord]) -> f64 {
        records
            .iter()
            .map(|r| r.l1_error / (self.anchor_c * r.delta_noise.powf(0.25)))
            .fold(0.0, f64::max)
    }
}

/// Fits the rate of the per-level mean errors over `fit_range`.
pub fn fit_rate(records: &[ConvergenceRecord], fit_range: Option<(f64, f64)>) -> Result<RateFit, CliError> {
    let mut levels: Vec<f64> = records.iter().map(|r| r.delta_noise).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let means: Vec<(f64, f64)> = levels
        .iter()
        .map(|&d| {
            let errs: Vec<f64> = records.iter().filter(|r| r.delta_noise == d).map(|r| r.l1_error).collect();
            (d, errs.iter().sum::<f64>() / errs.len() as f64)
        })
        .collect();
    let pts: Vec<(f64, f64)> = means
        .iter()
        .filter(|(d, _)| fit_range.is_none_or(|(lo, hi)| *d >= lo * (1.0 - 1e-9) && *d <= hi * (1.0 + 1e-9)))
        .map(|&(d, e)| (d.log10(), e.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(CliError::Config("need at least two noise levels to fit a rate".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let top = *levels.last().expect("nonempty");
    let anchor_c = records
        .iter()
        .filter(|r| r.delta_noise == top)
        .map(|r| r.l1_error / top.powf(0.25))
        .fold(0.0, f64::max);
    Ok(RateFit {
        means,
        slope,
        intercept: my - slope * mx,
        anchor_c,
    })
}

/// Levels at which the weighted level-set deviation is sampled.
const LEVEL_SAMPLES: usize = 512;

/// `sup_t |{u >= t} sym-diff {truth >= t}| dist(t, values)` over an equispaced
/// grid of levels covering both images.
pub fn levelset_weighted(u: &Image, truth: &Image, values: &[f64]) -> Result<f64, CliError> {
    let (lo, hi) = u
        .values()
        .iter()
        .chain(truth.values())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut best: f64 = 0.0;
    for k in 0..=LEVEL_SAMPLES {
        let t = lo + (hi - lo) * k as f64 / LEVEL_SAMPLES as f64;
        let dist = values.iter().map(|v| (t - v).abs()).fold(f64::INFINITY, f64::min);
        if dist > 0.0 {
            best = best.max(levelset_sym_diff(u, truth, t)? * dist);
        }
    }
    Ok(best)
}

fn block_values(block: &BlockImage) -> Vec<f64> {
    block.values().into_iter().flatten().collect()
}

/// Stable name of an instance in the noisy-run CSV.
pub fn image_id(inst: &Instance) -> String {
    format!("bin{:02}_{:03}", inst.bin, inst.index)
}

/// Every `(instance, level)` pair with `alpha = c_alpha sqrt(delta)`. Noise
/// seeds depend on the master seed, the instance and the level index only.
pub fn run_convergence(
    instances: &[Instance],
    cfg: &ConvergenceConfig,
) -> Result<(Vec<ConvergenceRecord>, RateFit), CliError> {
    if instances.is_empty() {
        return Err(CliError::Config("convergence dataset is empty".into()));
    }
    let grid = TorusGrid::new(cfg.grid)?;
    let jobs: Vec<(usize, &Instance)> = instances
        .iter()
        .flat_map(|inst| (0..cfg.levels.len()).map(move |k| (k, inst)))
        .collect();
    let records: Result<Vec<ConvergenceRecord>, CliError> = pool(cfg.threads)?.install(|| {
        jobs.par_iter()
            .map(|&(k, inst)| {
                let delta = cfg.levels[k];
                let alpha = cfg.c_alpha * delta.sqrt();
                let (dc, ac) = discrete_scaling(delta, alpha, cfg.grid);
                let truth = inst.block.rasterize(grid)?;
                let f = forward(&truth, cfg.phi)?;
                let seed = cfg.seed ^ ((inst.bin as u64) << 48) ^ ((inst.index as u64) << 24) ^ k as u64;
                let fd = add_noise(&f, NoiseSpec { delta: dc, seed })?;
                let (u, report) = solve(&fd, grid, &SolverConfig { alpha: ac, ..cfg.solver.clone() })?;
                Ok(ConvergenceRecord {
                    image_id: image_id(inst),
                    delta_noise: delta,
                    alpha,
                    l1_error: l1_error(&u, &truth)?,
                    iterations: report.iterations,
                    converged: report.converged,
                    levelset_weighted: levelset_weighted(&u, &truth, &block_values(&inst.block))?,
                })
            })
            .collect()
    });
    let records = records?;
    let fit = fit_rate(&records, cfg.fit_range)?;
    Ok((records, fit))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub phi: usize,
    pub tv: f64,
    pub data_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:e},{},{}",
            self.phi, self.tv, self.data_residual, self.iterations, self.converged as u8
        )
    }
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Noiseless reconstruction of `image` for each cutoff, in the given order.
pub fn run_image_sweep(
    image: &Image,
    phis: &[usize],
    solver: &SolverConfig,
    threads: usize,
) -> Result<Vec<(SweepRecord, Image)>, CliError> {
    let grid = image.grid();
    pool(threads)?.install(|| {
        phis.par_iter()
            .map(|&phi| {
                let f = forward(image, phi)?;
                let (u, report) = solve(&f, grid, &SolverConfig { alpha: 0.0, ..solver.clone() })?;
                let fu = forward(&u, phi)?;
                Ok((
                    SweepRecord {
                        phi,
                        tv: aniso_tv(&u),
                        data_residual: fu.dist_sqr(&f).sqrt(),
                        iterations: report.iterations,
                        converged: report.converged,
                    },
                    u,
                ))
            })
            .collect()
    })
}
