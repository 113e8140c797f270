//! Random ground-truth block images: separation-binned jump points, greedy
//! sign-consistent values and invalid counterparts with one swapped pair.

use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::block::BlockImage;
use crate::error::{Error, Result};

/// Closed separation interval `[lo, hi]` in torus units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
}

impl Bin {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo <= hi && hi.is_finite()) {
            return Err(Error::Domain(format!("bad separation bin [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Membership of a separation of `steps` grid steps out of `grid_points`.
    pub fn contains_steps(&self, steps: usize, grid_points: usize) -> bool {
        let d = steps as f64 / grid_points as f64;
        d >= self.lo - 1e-12 && d <= self.hi + 1e-12
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// The ten bins `[0.01 k - 0.005, 0.01 k + 0.005]`, `k = 1..=10`.
pub fn paper_bins() -> Vec<Bin> {
    (1..=10)
        .map(|k| Bin {
            lo: 0.01 * k as f64 - 0.005,
            hi: 0.01 * k as f64 + 0.005,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub bins: Vec<Bin>,
    pub per_bin: usize,
    pub grid_points: usize,
    pub seed: u64,
    /// Largest number of lines per direction; at least 2.
    pub max_lines: usize,
    pub max_attempts: usize,
    pub max_corrections: usize,
}

impl DatasetSpec {
    pub fn paper(per_bin: usize, seed: u64) -> Self {
        Self {
            bins: paper_bins(),
            per_bin,
            grid_points: 120,
            seed,
            max_lines: 20,
            max_attempts: 1_000_000,
            max_corrections: 1000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.per_bin == 0 {
            return Err(Error::Domain("per_bin must be at least 1".into()));
        }
        if self.max_lines < 2 || self.grid_points < 2 {
            return Err(Error::Domain("need at least 2 lines and 2 grid points".into()));
        }
        let mut sorted = self.bins.clone();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        if sorted.windows(2).any(|w| w[1].lo < w[0].hi - 1e-12) {
            return Err(Error::Domain("separation bins overlap".into()));
        }
        Ok(())
    }
}

/// A generated instance with its position in the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub bin: usize,
    pub index: usize,
    pub block: BlockImage,
}

impl Instance {
    pub fn file_name(&self) -> String {
        format!("bin{:02}_{:03}.txt", self.bin, self.index)
    }
}

/// Independent generator for instance `(bin, index)`; the stream id keeps
/// instances reproducible regardless of generation order.
pub fn instance_rng(seed: u64, bin: usize, index: usize, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((bin as u64) << 40) | ((index as u64) << 16) | attempt as u64);
    rng
}

/// Draws `M, N` uniformly from `2..=max_lines` and grid-aligned points until
/// the minimum separation lands in `bin`.
pub fn sample_jump_points(
    bin: Bin,
    grid_points: usize,
    max_lines: usize,
    max_attempts: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let infeasible = || Error::Infeasible {
        lo: bin.lo,
        hi: bin.hi,
        attempts: max_attempts,
    };
    // Two points on the circle are at most half a turn apart.
    if bin.lo > 0.5 + 1e-12 || !(0..=grid_points / 2).any(|s| s >= 1 && bin.contains_steps(s, grid_points)) {
        return Err(infeasible());
    }
    let max_lines = max_lines.min(grid_points);
    let pool: Vec<usize> = (0..grid_points).collect();
    for _ in 0..max_attempts {
        let m = rng.random_range(2..=max_lines);
        let n = rng.random_range(2..=max_lines);
        let mut xs: Vec<usize> = pool.choose_multiple(rng, m).copied().collect();
        let mut ys: Vec<usize> = pool.choose_multiple(rng, n).copied().collect();
        xs.sort_unstable();
        ys.sort_unstable();
        let d = min_gap(&xs, grid_points).min(min_gap(&ys, grid_points));
        if bin.contains_steps(d, grid_points) {
            return Ok((xs, ys));
        }
    }
    Err(infeasible())
}

fn min_gap(sorted: &[usize], grid_points: usize) -> usize {
    let wrap = sorted[0] + grid_points - sorted[sorted.len() - 1];
    sorted.windows(2).map(|w| w[1] - w[0]).fold(wrap, usize::min)
}

/// Neighbour of a cell across one of its four edges, with the line carrying
/// that edge. `lower` means the neighbour sits on the decreasing side.
#[derive(Clone, Copy)]
struct Edge {
    cell: (usize, usize),
    vertical: bool,
    line: usize,
    lower: bool,
}

struct Greedy {
    m: usize,
    n: usize,
    values: Vec<Option<f64>>,
    sign_v: Vec<i8>,
    sign_h: Vec<i8>,
    base: (f64, f64),
}

impl Greedy {
    fn edges(&self, (a, b): (usize, usize)) -> [Edge; 4] {
        let (m, n) = (self.m, self.n);
        [
            Edge { cell: ((a + m - 1) % m, b), vertical: true, line: a, lower: true },
            Edge { cell: ((a + 1) % m, b), vertical: true, line: (a + 1) % m, lower: false },
            Edge { cell: (a, (b + n - 1) % n), vertical: false, line: b, lower: true },
            Edge { cell: (a, (b + 1) % n), vertical: false, line: (b + 1) % n, lower: false },
        ]
    }

    fn get(&self, (a, b): (usize, usize)) -> Option<f64> {
        self.values[a * self.n + b]
    }

    fn sign(&self, e: &Edge) -> i8 {
        if e.vertical {
            self.sign_v[e.line]
        } else {
            self.sign_h[e.line]
        }
    }

    /// Bound imposed on a cell by one set neighbour with a fixed line sign:
    /// `Some((true, v))` for a lower bound `>= v`, `Some((false, v))` for an upper one.
    fn bound(&self, e: &Edge) -> Option<(bool, f64)> {
        let v = self.get(e.cell)?;
        let s = self.sign(e);
        if s == 0 {
            return None;
        }
        // jump = upper-side value minus lower-side value must have sign s
        Some((e.lower == (s > 0), v))
    }

    /// Admissible range of `cell` from its set neighbours, skipping `exclude`.
    /// Returns the range and the cells that pinned each end.
    fn range(&self, cell: (usize, usize), exclude: Option<(usize, usize)>) -> (f64, f64, Vec<(usize, usize)>, Vec<(usize, usize)>) {
        let (mut lo, mut hi) = self.base;
        let (mut lo_by, mut hi_by) = (Vec::new(), Vec::new());
        for e in self.edges(cell) {
            if Some(e.cell) == exclude {
                continue;
            }
            match self.bound(&e) {
                Some((true, v)) => {
                    if v > lo {
                        lo = v;
                    }
                    lo_by.push(e.cell);
                }
                Some((false, v)) => {
                    if v < hi {
                        hi = v;
                    }
                    hi_by.push(e.cell);
                }
                None => {}
            }
        }
        lo_by.retain(|&c| self.get(c) == Some(lo));
        hi_by.retain(|&c| self.get(c) == Some(hi));
        (lo, hi, lo_by, hi_by)
    }

    /// Sets a value and fixes the sign of every line on which it creates a jump.
    fn set(&mut self, cell: (usize, usize), v: f64) {
        self.values[cell.0 * self.n + cell.1] = Some(v);
        for e in self.edges(cell) {
            if let Some(w) = self.get(e.cell) {
                let jump = if e.lower { v - w } else { w - v };
                if jump != 0.0 && self.sign(&e) == 0 {
                    let s = if jump > 0.0 { 1 } else { -1 };
                    if e.vertical {
                        self.sign_v[e.line] = s;
                    } else {
                        self.sign_h[e.line] = s;
                    }
                }
            }
        }
        close_cycle(&mut self.sign_v);
        close_cycle(&mut self.sign_h);
    }

    fn unset(&mut self, cell: (usize, usize)) {
        self.values[cell.0 * self.n + cell.1] = None;
    }
}

/// Jumps along a row (or column) sum to zero around the torus, so lines of
/// one direction cannot all share a sign unless every jump vanishes. Once all
/// but one line agree, the last one is given the opposite sign.
fn close_cycle(signs: &mut [i8]) {
    let mut unsigned = signs.iter().enumerate().filter(|(_, &s)| s == 0).map(|(k, _)| k);
    let (Some(last), None) = (unsigned.next(), unsigned.next()) else {
        return;
    };
    let first = signs[(last + 1) % signs.len()];
    if signs.iter().enumerate().all(|(k, &s)| k == last || s == first) {
        signs[last] = -first;
    }
}

const RESTART_EVERY: usize = 100;

/// Assigns values to the cells of the jump points `(xs, ys)` one at a time in
/// random order, each drawn uniformly from the range that keeps every line's
/// jump sign consistent. A degenerate range is repaired by redrawing a
/// neighbour that pins it, or failing that by clearing all pinning neighbours
/// and revisiting them later; each repair counts against `max_corrections`,
/// and every hundredth repair restarts the assignment from scratch.
pub fn assign_values_greedy(
    grid_points: usize,
    xs: Vec<usize>,
    ys: Vec<usize>,
    max_corrections: usize,
    rng: &mut impl Rng,
) -> Result<BlockImage> {
    let (m, n) = (xs.len(), ys.len());
    let mut g = Greedy {
        m,
        n,
        values: vec![None; m * n],
        sign_v: vec![0; m],
        sign_h: vec![0; n],
        base: (0.0, 1.0),
    };
    let mut queue: Vec<(usize, usize)> = (0..m).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    queue.shuffle(rng);
    let mut corrections = 0;

    while let Some(cell) = queue.pop() {
        loop {
            let (lo, hi, lo_by, hi_by) = g.range(cell, None);
            if lo <= hi {
                g.set(cell, if lo < hi { rng.random_range(lo..=hi) } else { lo });
                break;
            }
            corrections += 1;
            if corrections > max_corrections {
                return Err(Error::GenerationFailure {
                    corrections: max_corrections,
                    m: cell.0,
                    n: cell.1,
                });
            }
            if corrections % RESTART_EVERY == 0 {
                // Local repairs are cycling; start over with fresh signs.
                g.values.fill(None);
                g.sign_v.fill(0);
                g.sign_h.fill(0);
                queue = (0..m).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
                queue.shuffle(rng);
                break;
            }
            // Try pulling a lower pin down to `hi`, then an upper pin up to `lo`.
            let mut fixed = false;
            let mut candidates: Vec<(usize, usize, bool)> = lo_by
                .iter()
                .map(|&c| (c.0, c.1, true))
                .chain(hi_by.iter().map(|&c| (c.0, c.1, false)))
                .collect();
            candidates.shuffle(rng);
            for &(a, b, is_lower_pin) in &candidates {
                let (nlo, nhi, _, _) = g.range((a, b), Some(cell));
                let (nlo, nhi) = if is_lower_pin { (nlo, nhi.min(hi)) } else { (nlo.max(lo), nhi) };
                if nlo <= nhi {
                    let v = if nlo < nhi { rng.random_range(nlo..=nhi) } else { nlo };
                    g.set((a, b), v);
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                for &(a, b, _) in &candidates {
                    g.unset((a, b));
                    queue.insert(0, (a, b));
                }
            }
        }
    }

    let values: Vec<Vec<f64>> = (0..m)
        .map(|a| (0..n).map(|b| g.get((a, b)).expect("all cells set")).collect())
        .collect();
    let block = BlockImage::new(grid_points, xs, ys, values)?;
    if !block.check_assumption_1().holds {
        return Err(Error::GenerationFailure {
            corrections,
            m,
            n,
        });
    }
    Ok(block)
}

/// Swaps one randomly chosen pair of neighbouring cell values so that the
/// sign-consistency assumption fails. Pairs are tried in random order.
pub fn make_invalid(block: &BlockImage, rng: &mut impl Rng) -> Result<BlockImage> {
    if !block.check_assumption_1().holds {
        return Err(Error::Precondition(block.check_assumption_1().violations.len()));
    }
    let (m, n) = (block.m(), block.n());
    let mut pairs = Vec::new();
    for a in 0..m {
        for b in 0..n {
            let right = ((a + 1) % m, b);
            let up = (a, (b + 1) % n);
            for other in [right, up] {
                if other != (a, b) && !pairs.contains(&(other, (a, b))) {
                    pairs.push(((a, b), other));
                }
            }
        }
    }
    pairs.shuffle(rng);
    let base = block.values();
    for ((a, b), (c, d)) in pairs {
        if base[a][b] == base[c][d] {
            continue;
        }
        let mut values = base.clone();
        values[a][b] = base[c][d];
        values[c][d] = base[a][b];
        let candidate = BlockImage::new(
            block.grid_points(),
            block.x_indices().to_vec(),
            block.y_indices().to_vec(),
            values,
        )?;
        if !candidate.check_assumption_1().holds {
            return Ok(candidate);
        }
    }
    Err(Error::TransformationFailure)
}

/// Generates `per_bin` valid instances for every bin. A value assignment that
/// exhausts its correction budget is retried with fresh jump points.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<Vec<Instance>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.bins.len() * spec.per_bin);
    for (bin_idx, &bin) in spec.bins.iter().enumerate() {
        for index in 0..spec.per_bin {
            out.push(generate_instance(spec, bin_idx, bin, index)?);
        }
    }
    Ok(out)
}

fn generate_instance(spec: &DatasetSpec, bin_idx: usize, bin: Bin, index: usize) -> Result<Instance> {
    const RETRIES: usize = 100;
    let mut last = None;
    for attempt in 0..RETRIES {
        let mut rng = instance_rng(spec.seed, bin_idx, index, attempt);
        let (xs, ys) = sample_jump_points(bin, spec.grid_points, spec.max_lines, spec.max_attempts, &mut rng)?;
        match assign_values_greedy(spec.grid_points, xs, ys, spec.max_corrections, &mut rng) {
            Ok(block) => {
                return Ok(Instance {
                    bin: bin_idx,
                    index,
                    block,
                })
            }
            Err(e @ Error::GenerationFailure { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Invalid counterpart of each instance, or `None` where no swap breaks the
/// assumption.
pub fn invalid_counterparts(instances: &[Instance], seed: u64) -> Vec<Option<Instance>> {
    instances
        .iter()
        .map(|inst| {
            // Stream offset keeps these draws apart from the valid generation.
            let mut rng = instance_rng(seed, inst.bin, inst.index, 0xFFFF);
            make_invalid(&inst.block, &mut rng).ok().map(|block| Instance {
                bin: inst.bin,
                index: inst.index,
                block,
            })
        })
        .collect()
}

/// Outcome of one exact-recovery run, as needed to pick the noisy dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryOutcome {
    pub bin: usize,
    pub index: usize,
    pub exact: bool,
}

/// Up to `per_bin` exactly recovered instances per bin, lowest index first.
/// Returns `(bin, index)` pairs sorted by bin, then index.
pub fn select_conv_subset(outcomes: &[RecoveryOutcome], per_bin: usize) -> Vec<(usize, usize)> {
    let mut exact: Vec<(usize, usize)> = outcomes.iter().filter(|o| o.exact).map(|o| (o.bin, o.index)).collect();
    exact.sort_unstable();
    exact.dedup();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (bin, index) in exact {
        if out.iter().filter(|(b, _)| *b == bin).count() < per_bin {
            out.push((bin, index));
        }
    }
    out
}

/// Manifest header of a dataset directory.
pub const MANIFEST_HEADER: &str = "bin,index,delta,M,N,file";

pub fn manifest_csv(instances: &[Instance]) -> String {
    let mut out = String::from(MANIFEST_HEADER);
    out.push('\n');
    for inst in instances {
        out.push_str(&format!(
            "{},{},{:?},{},{},{}\n",
            inst.bin,
            inst.index,
            inst.block.delta(),
            inst.block.m(),
            inst.block.n(),
            inst.file_name()
        ));
    }
    out
}

/// Writes one text file per instance plus `manifest.csv` into `dir`.
pub fn write_dataset(dir: &Path, instances: &[Instance]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for inst in instances {
        fs::write(dir.join(inst.file_name()), inst.block.to_text())?;
    }
    fs::write(dir.join("manifest.csv"), manifest_csv(instances))
}

/// Reads a dataset written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Vec<Instance>> {
    let io = |e: std::io::Error| Error::Domain(format!("{}: {e}", dir.display()));
    let manifest = fs::read_to_string(dir.join("manifest.csv")).map_err(io)?;
    let mut out = Vec::new();
    for (k, line) in manifest.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            line: k + 1,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_err("expected 6 fields"));
        }
        let bin = fields[0].parse().map_err(|_| parse_err("bad bin"))?;
        let index = fields[1].parse().map_err(|_| parse_err("bad index"))?;
        let text = fs::read_to_string(dir.join(fields[5])).map_err(io)?;
        out.push(Instance {
            bin,
            index,
            block: BlockImage::from_text(&text)?,
        });
    }
    Ok(out)
}

/// SHA-256 over the serialized instances, as lowercase hex.
pub fn dataset_digest(instances: &[Instance]) -> String {
    let mut hasher = Sha256::new();
    for inst in instances {
        hasher.update(format!("{} {}\n", inst.bin, inst.index));
        hasher.update(inst.block.to_text());
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn paper_bins_are_disjoint_and_centered() {
        let bins = paper_bins();
        assert_eq!(bins.len(), 10);
        assert!((bins[0].lo - 0.005).abs() < 1e-15 && (bins[9].hi - 0.105).abs() < 1e-15);
        assert!(DatasetSpec::paper(1, 0).validate().is_ok());
        let mut spec = DatasetSpec::paper(1, 0);
        spec.bins.push(Bin::new(0.05, 0.06).unwrap());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn widest_bin_forces_two_antipodal_lines() {
        let bin = Bin::new(0.45, 0.55).unwrap();
        let mut r = rng(1);
        for _ in 0..5 {
            let (xs, ys) = sample_jump_points(bin, 120, 20, 1_000_000, &mut r).unwrap();
            assert_eq!((xs.len(), ys.len()), (2, 2));
            assert!(min_gap(&xs, 120) >= 54 && min_gap(&ys, 120) >= 54);
        }
    }

    #[test]
    fn sampled_separation_lies_in_bin() {
        let bin = Bin::new(0.015, 0.025).unwrap();
        let mut r = rng(2);
        for _ in 0..100 {
            let (xs, ys) = sample_jump_points(bin, 120, 20, 1_000_000, &mut r).unwrap();
            let d = min_gap(&xs, 120).min(min_gap(&ys, 120));
            assert!(bin.contains_steps(d, 120), "{d}");
        }
    }

    #[test]
    fn infeasible_bin_is_reported() {
        let bin = Bin::new(0.9, 0.95).unwrap();
        assert!(matches!(
            sample_jump_points(bin, 120, 20, 1000, &mut rng(3)),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn greedy_output_satisfies_assumption() {
        let mut r = rng(4);
        let bins = paper_bins();
        for k in 0..1000 {
            let bin = bins[k % bins.len()];
            let (xs, ys) = sample_jump_points(bin, 120, 20, 1_000_000, &mut r).unwrap();
            let block = assign_values_greedy(120, xs, ys, 1000, &mut r).unwrap();
            assert!(block.check_assumption_1().holds);
            assert!(block.values().iter().flatten().all(|v| (0.0..=1.0).contains(v)));
            assert!(bin.contains_steps(block.delta_index(), 120));
        }
    }

    #[test]
    fn forced_positive_signs_give_monotone_two_by_two() {
        // With both line signs positive in x and in y around a 2-cycle, all
        // jumps must vanish: u(1,n) - u(0,n) >= 0 and u(0,n) - u(1,n) >= 0.
        let mut g = Greedy {
            m: 2,
            n: 2,
            values: vec![None; 4],
            sign_v: vec![1, 1],
            sign_h: vec![1, 1],
            base: (0.0, 1.0),
        };
        g.set((0, 0), 0.3);
        let (lo, hi, _, _) = g.range((1, 0), None);
        assert_eq!((lo, hi), (0.3, 0.3));
        let (lo, hi, _, _) = g.range((0, 1), None);
        assert_eq!((lo, hi), (0.3, 0.3));
    }

    #[test]
    fn greedy_is_deterministic() {
        let spec = DatasetSpec::paper(2, 99);
        let a = generate_dataset(&spec).unwrap();
        let b = generate_dataset(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(dataset_digest(&a), dataset_digest(&b));
        let c = generate_dataset(&DatasetSpec::paper(2, 100)).unwrap();
        assert_ne!(dataset_digest(&a), dataset_digest(&c));
    }

    #[test]
    fn invalid_counterparts_break_assumption_by_one_swap() {
        let mut r = rng(5);
        let bins = paper_bins();
        let mut made = 0;
        for k in 0..1000 {
            let (xs, ys) = sample_jump_points(bins[k % 10], 120, 20, 1_000_000, &mut r).unwrap();
            let block = assign_values_greedy(120, xs, ys, 1000, &mut r).unwrap();
            let Ok(bad) = make_invalid(&block, &mut r) else { continue };
            made += 1;
            assert!(!bad.check_assumption_1().holds);
            assert_eq!(bad.x_indices(), block.x_indices());
            assert_eq!(bad.y_indices(), block.y_indices());
            let changed = bad
                .values()
                .iter()
                .flatten()
                .zip(block.values().iter().flatten())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(changed, 2);
        }
        assert!(made > 900, "{made}");
    }

    #[test]
    fn make_invalid_needs_valid_input_and_a_breaking_swap() {
        let bad = BlockImage::new(10, vec![0, 5], vec![0, 5], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(make_invalid(&bad, &mut rng(0)).is_err());
        let flat = BlockImage::new(10, vec![0, 5], vec![0, 5], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(make_invalid(&flat, &mut rng(0)), Err(Error::TransformationFailure));
    }

    #[test]
    fn conv_subset_selection() {
        let mut outcomes = Vec::new();
        for bin in 0..10 {
            for index in 0..8 {
                outcomes.push(RecoveryOutcome {
                    bin,
                    index,
                    exact: bin > 0 || index == 3,
                });
            }
        }
        let picked = select_conv_subset(&outcomes, 5);
        assert_eq!(picked.len(), 1 + 9 * 5);
        assert_eq!(picked[0], (0, 3));
        assert_eq!(picked[1..6], [(1, 0), (1, 1), (1, 2), (1, 3), (1, 4)]);
        assert!(select_conv_subset(&[], 5).is_empty());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = std::env::temp_dir().join(format!("tvsr-datagen-{}", std::process::id()));
        let data = generate_dataset(&DatasetSpec {
            bins: vec![Bin::new(0.045, 0.055).unwrap()],
            ..DatasetSpec::paper(3, 7)
        })
        .unwrap();
        write_dataset(&dir, &data).unwrap();
        let manifest = fs::read_to_string(dir.join("manifest.csv")).unwrap();
        assert!(manifest.starts_with(MANIFEST_HEADER));
        let back = read_dataset(&dir).unwrap();
        fs::remove_dir_all(&dir).unwrap();
        assert_eq!(back, data);
    }
}
