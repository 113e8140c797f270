//! Builds all three certificate families for one block image and renders a
//! key-value report.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvsr::block::BlockImage;
use tvsr::certificates::dual::CELL_INTEGRAL_CONSTANT;
use tvsr::certificates::{build_certificate_i, build_certificate_ii, build_certificate_iii};

#[derive(Debug, Clone)]
pub struct CertifyConfig {
    pub phi: usize,
    /// Sign patterns tried for families II and III. When `2^(M N)` is no
    /// larger, every pattern is enumerated instead.
    pub patterns: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            phi: 18,
            patterns: 16,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub report: String,
    /// Family names (`I`, `II`, `III`) that failed or could not be built.
    pub failed: Vec<&'static str>,
}

impl CertifyOutcome {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Sign matrices `M x N` to test: all of them when few, random ones otherwise.
pub fn sign_patterns(m: usize, n: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<Vec<i8>>> {
    let cells = m * n;
    let decode = |bits: u64| -> Vec<Vec<i8>> {
        (0..m)
            .map(|a| (0..n).map(|b| if bits >> (a * n + b) & 1 == 1 { 1 } else { -1 }).collect())
            .collect()
    };
    if cells < 63 && (1u64 << cells) <= count as u64 {
        (0..1u64 << cells).map(decode).collect()
    } else {
        (0..count)
            .map(|_| (0..m).map(|_| (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect()).collect())
            .collect()
    }
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

/// Runs families I, II and III. Failures are reported in their block and do
/// not stop the other families.
pub fn run_certify(block: &BlockImage, cfg: &CertifyConfig) -> CertifyOutcome {
    let mut out = String::new();
    let mut failed = Vec::new();
    let phi = cfg.phi;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let _ = writeln!(out, "[instance]");
    kv(&mut out, "M", block.m());
    kv(&mut out, "N", block.n());
    kv(&mut out, "delta", format!("{:.6}", block.delta()));
    kv(&mut out, "phi", phi);
    kv(&mut out, "delta_times_phi_plus_1", format!("{:.4}", block.delta() * (phi as f64 + 1.0)));

    let _ = writeln!(out, "\n[certificate I]");
    match build_certificate_i(block, phi) {
        Ok(c) => {
            let b = &c.bundle;
            let valid = b.is_valid();
            kv(&mut out, "status", if valid { "pass" } else { "fail" });
            kv(&mut out, "R", format!("{:.6e}", b.r));
            kv(&mut out, "kappa", format!("{:.6e}", b.kappa));
            kv(&mut out, "eta", format!("{:.6e}", b.eta));
            kv(&mut out, "C2", format!("{:.4}", b.r * (phi as f64 + 1.0)));
            kv(&mut out, "C3", format!("{:.4}", b.eta / (phi as f64 + 1.0).powi(2)));
            kv(&mut out, "C4", format!("{:.4}", b.kappa / (phi as f64 + 1.0).powi(2)));
            let (rv, sv) = c.vertical.residuals();
            let (rh, sh) = c.horizontal.residuals();
            kv(&mut out, "value_residual", format!("{:.3e}", rv.max(rh)));
            kv(&mut out, "slope_residual", format!("{:.3e}", sv.max(sh)));
            kv(
                &mut out,
                "deviation_constant",
                format!("{:.4}", c.vertical.deviation_constant().max(c.horizontal.deviation_constant())),
            );
            for m in &b.margins {
                kv(&mut out, &format!("margin.{}", m.name), format!("{:.6e}", m.value));
            }
            if !valid {
                failed.push("I");
            }
        }
        Err(e) => {
            kv(&mut out, "status", "error");
            kv(&mut out, "error", e);
            failed.push("I");
        }
    }

    let _ = writeln!(out, "\n[certificate II]");
    let patterns = sign_patterns(block.m(), block.n(), cfg.patterns, &mut rng);
    kv(&mut out, "patterns", patterns.len());
    kv(&mut out, "proof_constant", format!("{CELL_INTEGRAL_CONSTANT:.4}"));
    let mut min_ii = f64::INFINITY;
    let mut error = None;
    for s in &patterns {
        match build_certificate_ii(block, s, phi) {
            Ok(c) => min_ii = min_ii.min(c.min_normalized),
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    match error {
        Some(e) => {
            kv(&mut out, "status", "error");
            kv(&mut out, "error", e);
            failed.push("II");
        }
        None => {
            let ok = min_ii > 0.0;
            kv(&mut out, "status", if ok { "pass" } else { "fail" });
            kv(&mut out, "min_normalized_integral", format!("{min_ii:.6}"));
            kv(&mut out, "above_proof_constant", min_ii >= CELL_INTEGRAL_CONSTANT);
            if !ok {
                failed.push("II");
            }
        }
    }

    let _ = writeln!(out, "\n[certificate III]");
    let patterns = sign_patterns(block.m(), block.n(), cfg.patterns, &mut rng);
    kv(&mut out, "patterns", patterns.len());
    let mut min_segment = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    let mut eta: f64 = 0.0;
    let mut r = f64::INFINITY;
    let mut notes = 0;
    let mut error = None;
    for s in &patterns {
        let flipped: Vec<Vec<i8>> = s.iter().map(|row| row.iter().rev().copied().collect()).collect();
        match build_certificate_iii(block, s, &flipped, phi) {
            Ok(c) => {
                min_segment = min_segment.min(c.min_segment);
                min_margin = min_margin.min(c.bundle.min_margin());
                eta = eta.max(c.bundle.eta);
                r = r.min(c.bundle.r);
                notes += c.bundle.notes.len();
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    match error {
        Some(e) => {
            kv(&mut out, "status", "error");
            kv(&mut out, "error", e);
            failed.push("III");
        }
        None => {
            kv(&mut out, "status", if min_margin >= 0.0 { "pass" } else { "fail" });
            kv(&mut out, "R", format!("{r:.6e}"));
            kv(&mut out, "eta", format!("{eta:.6e}"));
            kv(&mut out, "min_segment_integral", format!("{min_segment:.6}"));
            kv(&mut out, "segments_below_0.3", notes);
            kv(&mut out, "min_margin", format!("{min_margin:.6e}"));
            if min_margin < 0.0 {
                failed.push("III");
            }
        }
    }
    CertifyOutcome { report: out, failed }
}
