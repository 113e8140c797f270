//! Piecewise-constant ground-truth images with axis-aligned jump lines.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::torus::{cyclic_min_gap_index, Image, LineSet, TorusGrid};

/// Piecewise-constant image `sum u_mn * chi([x_m, x_{m+1}) x [y_n, y_{n+1}))`.
///
/// Jump coordinates are kept as indices on a `grid_points`-node grid of `[0, 1)`;
/// cell `(m, n)` is the half-open rectangle starting at `(x_m, y_n)` and ending
/// at the next coordinate cyclically.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockImage {
    grid_points: usize,
    xs: Vec<usize>,
    ys: Vec<usize>,
    values: Vec<f64>,
    sign_v: Vec<i8>,
    sign_h: Vec<i8>,
}

/// Either a vertical line `x = x_m` or a horizontal line `y = y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Line {
    Vertical(usize),
    Horizontal(usize),
}

/// A single edge segment of a jump line whose sign disagrees with the rest
/// of its line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub line: Line,
    /// Row index `n` for vertical lines, column index `m` for horizontal ones.
    pub segment: usize,
    pub jump: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionReport {
    pub holds: bool,
    pub violations: Vec<Violation>,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

impl BlockImage {
    /// Builds a block image and derives each line's jump sign from the values.
    /// Lines with mixed jump signs get sign 0; use [`BlockImage::check_assumption_1`]
    /// to detect them.
    pub fn new(grid_points: usize, xs: Vec<usize>, ys: Vec<usize>, values: Vec<Vec<f64>>) -> Result<Self> {
        let mut block = Self::unsigned(grid_points, xs, ys, values)?;
        block.sign_v = (0..block.m()).map(|m| block.derived_sign(Line::Vertical(m))).collect();
        block.sign_h = (0..block.n()).map(|n| block.derived_sign(Line::Horizontal(n))).collect();
        Ok(block)
    }

    /// Builds a block image with explicitly assigned line signs. A nonzero sign
    /// must agree with every jump on its line.
    pub fn with_signs(
        grid_points: usize,
        xs: Vec<usize>,
        ys: Vec<usize>,
        values: Vec<Vec<f64>>,
        sign_v: Vec<i8>,
        sign_h: Vec<i8>,
    ) -> Result<Self> {
        let mut block = Self::unsigned(grid_points, xs, ys, values)?;
        if sign_v.len() != block.m() || sign_h.len() != block.n() {
            return Err(Error::Domain("sign rows do not match the number of lines".into()));
        }
        if sign_v.iter().chain(&sign_h).any(|s| !(-1..=1).contains(s)) {
            return Err(Error::Domain("signs must lie in {-1, 0, 1}".into()));
        }
        block.sign_v = sign_v;
        block.sign_h = sign_h;
        for line in block.lines() {
            let s = block.line_sign(line);
            if s != 0 && block.jumps(line).any(|j| sign(j) == -s) {
                return Err(Error::Domain(format!("sign {s} of {line:?} contradicts its jumps")));
            }
        }
        Ok(block)
    }

    fn unsigned(grid_points: usize, xs: Vec<usize>, ys: Vec<usize>, values: Vec<Vec<f64>>) -> Result<Self> {
        if grid_points < 2 {
            return Err(Error::Domain("jump grid needs at least 2 points".into()));
        }
        for coords in [&xs, &ys] {
            if coords.is_empty() {
                return Err(Error::Domain("empty jump coordinate list".into()));
            }
            if coords.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Domain("jump coordinates must be strictly increasing".into()));
            }
            if coords[coords.len() - 1] >= grid_points {
                return Err(Error::Domain("jump coordinate outside [0, 1)".into()));
            }
        }
        if values.len() != xs.len() || values.iter().any(|row| row.len() != ys.len()) {
            return Err(Error::Domain(format!(
                "value matrix must be {} x {}",
                xs.len(),
                ys.len()
            )));
        }
        let values: Vec<f64> = values.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite block value".into()));
        }
        Ok(Self {
            grid_points,
            sign_v: vec![0; xs.len()],
            sign_h: vec![0; ys.len()],
            xs,
            ys,
            values,
        })
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn m(&self) -> usize {
        self.xs.len()
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    pub fn x_indices(&self) -> &[usize] {
        &self.xs
    }

    pub fn y_indices(&self) -> &[usize] {
        &self.ys
    }

    pub fn xs(&self) -> Vec<f64> {
        self.xs.iter().map(|&i| i as f64 / self.grid_points as f64).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.ys.iter().map(|&i| i as f64 / self.grid_points as f64).collect()
    }

    #[inline]
    pub fn value(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.n() + n]
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n()).map(<[f64]>::to_vec).collect()
    }

    pub fn sign_v(&self) -> &[i8] {
        &self.sign_v
    }

    pub fn sign_h(&self) -> &[i8] {
        &self.sign_h
    }

    pub fn line_sign(&self, line: Line) -> i8 {
        match line {
            Line::Vertical(m) => self.sign_v[m],
            Line::Horizontal(n) => self.sign_h[n],
        }
    }

    /// Length of column `m` (cyclic gap `x_{m+1} - x_m`, a full turn when M = 1).
    pub fn column_width(&self, m: usize) -> f64 {
        cell_len(&self.xs, m, self.grid_points)
    }

    pub fn row_height(&self, n: usize) -> f64 {
        cell_len(&self.ys, n, self.grid_points)
    }

    /// Minimum separation in torus units.
    pub fn delta(&self) -> f64 {
        self.delta_index() as f64 / self.grid_points as f64
    }

    /// Minimum separation in jump-grid steps.
    pub fn delta_index(&self) -> usize {
        cyclic_min_gap_index(&self.xs, self.grid_points).min(cyclic_min_gap_index(&self.ys, self.grid_points))
    }

    pub fn line_set(&self, radius: f64) -> LineSet {
        LineSet {
            vertical: self.xs(),
            horizontal: self.ys(),
            radius,
        }
    }

    pub fn lines(&self) -> impl Iterator<Item = Line> {
        (0..self.m())
            .map(Line::Vertical)
            .chain((0..self.n()).map(Line::Horizontal))
    }

    /// Gray-value jumps across `line`, one per segment, oriented in the
    /// increasing coordinate direction.
    pub fn jumps(&self, line: Line) -> Box<dyn Iterator<Item = f64> + '_> {
        match line {
            Line::Vertical(m) => {
                let left = (m + self.m() - 1) % self.m();
                Box::new((0..self.n()).map(move |n| self.value(m, n) - self.value(left, n)))
            }
            Line::Horizontal(n) => {
                let below = (n + self.n() - 1) % self.n();
                Box::new((0..self.m()).map(move |m| self.value(m, n) - self.value(m, below)))
            }
        }
    }

    fn derived_sign(&self, line: Line) -> i8 {
        let mut s = 0;
        for j in self.jumps(line) {
            let sj = sign(j);
            if sj != 0 {
                if s == 0 {
                    s = sj;
                } else if s != sj {
                    return 0;
                }
            }
        }
        s
    }

    /// Checks that along every jump line all nonzero jumps share one sign.
    /// Offending segments are those carrying the minority sign of their line
    /// (the negative ones on a tie).
    pub fn check_assumption_1(&self) -> AssumptionReport {
        let mut violations = Vec::new();
        for line in self.lines() {
            let jumps: Vec<i8> = self.jumps(line).map(sign).collect();
            let pos = jumps.iter().filter(|&&s| s > 0).count();
            let neg = jumps.iter().filter(|&&s| s < 0).count();
            if pos > 0 && neg > 0 {
                let minority = if neg <= pos { -1 } else { 1 };
                violations.extend(
                    jumps
                        .iter()
                        .enumerate()
                        .filter(|(_, &s)| s == minority)
                        .map(|(segment, &jump)| Violation { line, segment, jump }),
                );
            }
        }
        AssumptionReport {
            holds: violations.is_empty(),
            violations,
        }
    }

    /// Value of the block containing the torus point `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = locate(&self.xs(), x);
        let n = locate(&self.ys(), y);
        self.value(m, n)
    }

    /// Cell index `(m, n)` of the pixel `(i, j)` on a grid these jumps align with.
    fn check_alignment(&self, grid: TorusGrid) -> Result<()> {
        let n = grid.n_pixels();
        for &idx in self.xs.iter().chain(&self.ys) {
            if (idx * n) % self.grid_points != 0 {
                return Err(Error::Alignment {
                    index: idx,
                    grid_points: self.grid_points,
                    n_pixels: n,
                });
            }
        }
        Ok(())
    }

    /// Pixel index of the jump coordinate `idx` on an aligned grid.
    pub fn pixel_of(&self, idx: usize, grid: TorusGrid) -> usize {
        idx * grid.n_pixels() / self.grid_points
    }

    /// Samples the block image at pixel centers.
    pub fn rasterize(&self, grid: TorusGrid) -> Result<Image> {
        self.check_alignment(grid)?;
        let np = grid.n_pixels();
        let cols = cell_of_pixels(&self.xs, self.grid_points, np);
        let rows = cell_of_pixels(&self.ys, self.grid_points, np);
        Ok(Image::from_fn(grid, |i, j| self.value(cols[i], rows[j])))
    }

    /// Line-oriented text form: `M N`, x row, y row, M value rows, the
    /// vertical sign row and the horizontal sign row, preceded by a
    /// `# grid=<points>` comment. Floats use the shortest round-trip notation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# grid={}", self.grid_points);
        let _ = writeln!(out, "{} {}", self.m(), self.n());
        let join = |v: Vec<String>| v.join(" ");
        let _ = writeln!(out, "{}", join(self.xs().iter().map(|x| format!("{x:?}")).collect()));
        let _ = writeln!(out, "{}", join(self.ys().iter().map(|y| format!("{y:?}")).collect()));
        for m in 0..self.m() {
            let _ = writeln!(out, "{}", join((0..self.n()).map(|n| format!("{:?}", self.value(m, n))).collect()));
        }
        let _ = writeln!(out, "{}", join(self.sign_v.iter().map(i8::to_string).collect()));
        let _ = writeln!(out, "{}", join(self.sign_h.iter().map(i8::to_string).collect()));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut grid_points = 120;
        let mut lines = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(g) = comment.trim().strip_prefix("grid=") {
                    grid_points = g.trim().parse().map_err(|_| Error::Parse {
                        line: k + 1,
                        msg: format!("bad grid size {g:?}"),
                    })?;
                }
            } else if !line.is_empty() {
                lines.push((k + 1, line));
            }
        }
        let mut it = lines.into_iter();
        let mut next = |what: &str| {
            it.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("missing {what}"),
            })
        };
        let (ln, header) = next("header")?;
        let dims: Vec<usize> = parse_row(ln, header)?;
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: ln,
                msg: "header must be `M N`".into(),
            });
        }
        let (m, n) = (dims[0], dims[1]);
        let to_index = |ln: usize, t: f64| -> Result<usize> {
            let scaled = t * grid_points as f64;
            let idx = scaled.round();
            if (scaled - idx).abs() > 1e-6 || idx < 0.0 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("coordinate {t} is not on the {grid_points}-point grid"),
                });
            }
            Ok(idx as usize)
        };
        let mut coords = |what: &str, count: usize| -> Result<Vec<usize>> {
            let (ln, row) = next(what)?;
            let vals: Vec<f64> = parse_row(ln, row)?;
            if vals.len() != count {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {count} {what}"),
                });
            }
            vals.into_iter().map(|t| to_index(ln, t)).collect()
        };
        let xs = coords("xs", m)?;
        let ys = coords("ys", n)?;
        let mut values = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, row) = next("value row")?;
            let vals: Vec<f64> = parse_row(ln, row)?;
            if vals.len() != n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {n} values"),
                });
            }
            values.push(vals);
        }
        let (ln_v, row_v) = next("vertical signs")?;
        let sign_v: Vec<i8> = parse_row(ln_v, row_v)?;
        let (ln_h, row_h) = next("horizontal signs")?;
        let sign_h: Vec<i8> = parse_row(ln_h, row_h)?;
        Self::with_signs(grid_points, xs, ys, values, sign_v, sign_h)
    }
}

fn parse_row<T: std::str::FromStr>(line: usize, row: &str) -> Result<Vec<T>> {
    row.split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse {tok:?}"),
            })
        })
        .collect()
}

fn cell_len(coords: &[usize], k: usize, grid_points: usize) -> f64 {
    let next = coords[(k + 1) % coords.len()];
    let gap = (next + grid_points - coords[k]) % grid_points;
    let gap = if gap == 0 { grid_points } else { gap };
    gap as f64 / grid_points as f64
}

/// Index of the half-open cell `[c_k, c_{k+1})` containing `t`.
fn locate(coords: &[f64], t: f64) -> usize {
    match coords.iter().rposition(|&c| c <= t) {
        Some(k) => k,
        None => coords.len() - 1,
    }
}

/// Cell index of every pixel; pixel `p` starts at `p / n_pixels`, which for
/// aligned jumps lies in the same cell as its center.
fn cell_of_pixels(coords: &[usize], grid_points: usize, n_pixels: usize) -> Vec<usize> {
    (0..n_pixels)
        .map(|p| match coords.iter().rposition(|&c| c * n_pixels <= p * grid_points) {
            Some(k) => k,
            None => coords.len() - 1,
        })
        .collect()
}
