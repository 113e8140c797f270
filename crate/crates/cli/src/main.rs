use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tvsr::block::BlockImage;
use tvsr::datagen::{
    dataset_digest, generate_dataset, invalid_counterparts, read_dataset, select_conv_subset, write_dataset,
    DatasetSpec, Instance, RecoveryOutcome,
};
use tvsr::solver::SolverConfig;
use tvsr_cli::certify::{run_certify, CertifyConfig};
use tvsr_cli::experiments::{
    convergence_csv, exact_fractions, noise_levels, parse_results_csv, results_csv, run_convergence,
    run_exact_recovery, run_image_sweep, sweep_csv, ConvergenceConfig, RecoveryConfig, C_ALPHA,
};
use tvsr_cli::pgm::{read_pgm, write_pgm_binary};
use tvsr_cli::CliError;

#[derive(Parser)]
#[command(name = "tvsr", version, about = "Anisotropic TV superresolution experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed for datasets, sign patterns and noise.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Pixels per side of the reconstruction grid.
    #[arg(long, global = true, default_value_t = 120)]
    grid: usize,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Gray-value tolerance of the exact-recovery test.
    #[arg(long, global = true, default_value_t = 1e-4)]
    tol: f64,
    /// Use the full experiment sizes instead of the desk-scale defaults.
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Relative change at which the solver stops.
    #[arg(long, global = true, default_value_t = 1e-9)]
    solver_tol: f64,
    #[arg(long, global = true, default_value_t = 20_000)]
    max_iters: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate valid and invalid block-image datasets.
    Gen {
        /// Instances per separation bin (default 20, or 100 with --paper-scale).
        #[arg(long)]
        per_bin: Option<usize>,
    },
    /// Noiseless reconstructions with the exact-recovery test.
    Exact {
        /// Dataset directory (default <out>/valid).
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [12, 18])]
        phi: Vec<usize>,
        /// Output CSV name inside the output directory.
        #[arg(long, default_value = "exact.csv")]
        name: String,
    },
    /// Noisy reconstructions with alpha = C sqrt(delta) and a fitted rate.
    Converge {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Existing exact-recovery results used to pick the images; recovered
        /// afresh at the cutoff when absent.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Images per bin (default 2, or 5 with --paper-scale).
        #[arg(long)]
        per_bin: Option<usize>,
        /// Noise levels between 1e-3 and 1e3 (default 10, or 20 with --paper-scale).
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 18)]
        phi: usize,
        #[arg(long, default_value_t = C_ALPHA)]
        c_alpha: f64,
    },
    /// Reconstruct a square PGM image for a list of cutoffs.
    Sweep {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [3, 6, 9, 12, 15, 18, 21, 24, 27, 30, 33])]
        phi: Vec<usize>,
    },
    /// Build and verify the dual certificates of one block image.
    Certify {
        #[arg(long)]
        block: PathBuf,
        #[arg(long, default_value_t = 18)]
        phi: usize,
        #[arg(long, default_value_t = 16)]
        patterns: usize,
    },
}

fn solver(g: &Global) -> SolverConfig {
    SolverConfig {
        tol: g.solver_tol,
        max_iters: g.max_iters,
        ..SolverConfig::default()
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load(dir: &Path) -> Result<Vec<Instance>, CliError> {
    read_dataset(dir).map_err(|e| CliError::Io(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    match cli.command {
        Command::Gen { per_bin } => {
            let per_bin = per_bin.unwrap_or(if g.paper_scale { 100 } else { 20 });
            let mut spec = DatasetSpec::paper(per_bin, g.seed);
            spec.grid_points = g.grid;
            let valid = generate_dataset(&spec)?;
            let invalid: Vec<Instance> = invalid_counterparts(&valid, g.seed).into_iter().flatten().collect();
            write_dataset(&g.out.join("valid"), &valid)?;
            write_dataset(&g.out.join("invalid"), &invalid)?;
            println!("valid {} instances, digest {}", valid.len(), dataset_digest(&valid));
            println!("invalid {} instances, digest {}", invalid.len(), dataset_digest(&invalid));
        }
        Command::Exact { dataset, phi, name } => {
            let instances = load(&dataset.unwrap_or_else(|| g.out.join("valid")))?;
            let cfg = RecoveryConfig {
                grid: g.grid,
                phis: phi.clone(),
                solver: solver(g),
                exact_tol: g.tol,
                threads: g.threads,
            };
            let records = run_exact_recovery(&instances, &cfg)?;
            write(&g.out.join(&name), results_csv(&records))?;
            for &p in &phi {
                for (bin, runs, exact) in exact_fractions(&records, p) {
                    println!("phi {p} bin {bin}: {exact}/{runs} exact");
                }
            }
        }
        Command::Converge {
            dataset,
            results,
            per_bin,
            levels,
            phi,
            c_alpha,
        } => {
            let instances = load(&dataset.unwrap_or_else(|| g.out.join("valid")))?;
            let outcomes: Vec<RecoveryOutcome> = match results {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    parse_results_csv(&text)?.iter().filter(|r| r.phi == phi).map(|r| r.outcome()).collect()
                }
                None => {
                    let cfg = RecoveryConfig {
                        grid: g.grid,
                        phis: vec![phi],
                        solver: solver(g),
                        exact_tol: g.tol,
                        threads: g.threads,
                    };
                    run_exact_recovery(&instances, &cfg)?.iter().map(|r| r.outcome()).collect()
                }
            };
            let per_bin = per_bin.unwrap_or(if g.paper_scale { 5 } else { 2 });
            let chosen = select_conv_subset(&outcomes, per_bin);
            let subset: Vec<Instance> = instances
                .into_iter()
                .filter(|i| chosen.contains(&(i.bin, i.index)))
                .collect();
            let count = levels.unwrap_or(if g.paper_scale { 20 } else { 10 });
            let cfg = ConvergenceConfig {
                grid: g.grid,
                phi,
                levels: noise_levels(count, -3.0, 3.0),
                c_alpha,
                solver: solver(g),
                seed: g.seed,
                threads: g.threads,
                fit_range: None,
            };
            let (records, fit) = run_convergence(&subset, &cfg)?;
            write(&g.out.join("convergence.csv"), convergence_csv(&records))?;
            for (d, e) in &fit.means {
                println!("delta {d:.3e}: mean l1 {e:.4e}");
            }
            println!("images {}, fitted slope {:.4}", subset.len(), fit.slope);
        }
        Command::Sweep { image, phi } => {
            let bytes = fs::read(&image).map_err(|e| CliError::Io(format!("{}: {e}", image.display())))?;
            let img = read_pgm(&bytes)?;
            let results = run_image_sweep(&img, &phi, &solver(g), g.threads)?;
            let records: Vec<_> = results.iter().map(|(r, _)| r.clone()).collect();
            for (r, u) in &results {
                write(&g.out.join(format!("sweep_phi{:02}.pgm", r.phi)), write_pgm_binary(u))?;
            }
            write(&g.out.join("sweep.csv"), sweep_csv(&records))?;
            println!("{} reconstructions written to {}", results.len(), g.out.display());
        }
        Command::Certify { block, phi, patterns } => {
            let text = fs::read_to_string(&block).map_err(|e| CliError::Io(format!("{}: {e}", block.display())))?;
            let b = BlockImage::from_text(&text).map_err(|e| CliError::Io(e.to_string()))?;
            let outcome = run_certify(
                &b,
                &CertifyConfig {
                    phi,
                    patterns,
                    seed: g.seed,
                },
            );
            print!("{}", outcome.report);
            write(&g.out.join("certificate.txt"), &outcome.report)?;
            if !outcome.passed() {
                return Err(CliError::Certificate(format!("families {:?} failed", outcome.failed)));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
