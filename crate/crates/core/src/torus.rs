//! Geometry of the flat torus `(R/Z)^2` and the pixel grids laid over it.

use crate::error::{Error, Result};

/// Distance between two points of `R/Z`.
pub fn cyclic_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Wraps a real number into `[0, 1)`.
pub fn wrap(t: f64) -> f64 {
    let w = t.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Smallest gap between cyclically consecutive points. A single point has a
/// gap of 1 to itself (wrap-around).
pub fn cyclic_min_gap(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("empty point list".into()));
    }
    if let Some(p) = points.iter().find(|p| !(0.0..1.0).contains(*p)) {
        return Err(Error::Domain(format!("point {p} outside [0, 1)")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let wrap_gap = sorted[0] + 1.0 - sorted[sorted.len() - 1];
    Ok(sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::min))
}

/// Minimum separation of the jump coordinates: the smaller of the cyclic
/// minimum gaps within `xs` and within `ys`. Points of the two lists are
/// never compared with each other.
pub fn min_separation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(cyclic_min_gap(xs)?.min(cyclic_min_gap(ys)?))
}

/// Integer version of [`cyclic_min_gap`] on a grid of `grid_points` nodes.
pub(crate) fn cyclic_min_gap_index(points: &[usize], grid_points: usize) -> usize {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    let wrap_gap = sorted[0] + grid_points - sorted[sorted.len() - 1];
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, usize::min)
}

/// Uniform `n_pixels x n_pixels` grid on the torus.
///
/// Pixel `(i, j)` covers `[i h, (i+1) h) x [j h, (j+1) h)` with `h = 1/n_pixels`;
/// its Fourier sampling node is the corner `(i h, j h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n_pixels: usize,
}

impl TorusGrid {
    pub fn new(n_pixels: usize) -> Result<Self> {
        if n_pixels < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 pixels per axis, got {n_pixels}"
            )));
        }
        Ok(Self { n_pixels })
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n_pixels as f64
    }

    pub fn len(&self) -> usize {
        self.n_pixels * self.n_pixels
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing()
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_pixels + i
    }

    #[inline]
    pub fn next(&self, i: usize) -> usize {
        if i + 1 == self.n_pixels {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    pub fn prev(&self, i: usize) -> usize {
        if i == 0 {
            self.n_pixels - 1
        } else {
            i - 1
        }
    }
}

/// Real gray-value field on a [`TorusGrid`]. Storage is row-major with rows
/// running along `x`: entry `(i, j)` lives at `j * n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl Image {
    pub fn from_vec(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at entry {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Builds an image by evaluating `f(i, j)` on every pixel.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = grid.n_pixels();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                values.push(f(i, j));
            }
        }
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Periodic pixel access; indices wrap modulo `n_pixels`.
    pub fn get(&self, i: isize, j: isize) -> f64 {
        let n = self.grid.n_pixels() as isize;
        let (i, j) = (i.rem_euclid(n) as usize, j.rem_euclid(n) as usize);
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Union of vertical lines `{x = x_m}` and horizontal lines `{y = y_n}`
/// together with a neighbourhood radius.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSet {
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
    pub radius: f64,
}

impl LineSet {
    pub fn new(vertical: Vec<f64>, horizontal: Vec<f64>, radius: f64) -> Result<Self> {
        if let Some(p) = vertical
            .iter()
            .chain(&horizontal)
            .find(|p| !(0.0..1.0).contains(*p))
        {
            return Err(Error::Domain(format!("line coordinate {p} outside [0, 1)")));
        }
        if !(radius >= 0.0) {
            return Err(Error::Domain(format!("negative radius {radius}")));
        }
        Ok(Self {
            vertical,
            horizontal,
            radius,
        })
    }

    /// Distance from abscissa `x` to the nearest vertical line.
    pub fn dist_vertical(&self, x: f64) -> f64 {
        nearest(&self.vertical, x)
    }

    /// Distance from ordinate `y` to the nearest horizontal line.
    pub fn dist_horizontal(&self, y: f64) -> f64 {
        nearest(&self.horizontal, y)
    }

    pub fn dist(&self, x: f64, y: f64) -> f64 {
        self.dist_vertical(x).min(self.dist_horizontal(y))
    }

    /// Membership in the open neighbourhood `dist((x, y), L) < R`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.dist(x, y) < self.radius
    }
}

fn nearest(coords: &[f64], t: f64) -> f64 {
    coords
        .iter()
        .map(|&c| cyclic_dist(c, t))
        .fold(f64::INFINITY, f64::min)
}
