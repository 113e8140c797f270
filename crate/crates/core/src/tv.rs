//! Discrete anisotropic total variation on the periodic grid and the error
//! metrics used to compare reconstructions.
//!
//! `grad` uses periodic forward differences divided by the spacing `h`, and
//! `div` is its exact negative adjoint. Integrals over the torus carry the
//! cell area `h^2`, so for grid-aligned block images `aniso_tv` equals the
//! continuum anisotropic perimeter-weighted jump sum.

use crate::error::{Error, Result};
use crate::torus::{Image, LineSet, TorusGrid};

/// Pair of fields `(px, py)` on a grid; the dual variable of the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    grid: TorusGrid,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
}

impl GradientField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            px: vec![0.0; grid.len()],
            py: vec![0.0; grid.len()],
        }
    }

    pub fn new(grid: TorusGrid, px: Vec<f64>, py: Vec<f64>) -> Result<Self> {
        if px.len() != grid.len() || py.len() != grid.len() {
            return Err(Error::Domain("gradient field size mismatch".into()));
        }
        Ok(Self { grid, px, py })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// `max(|px|, |py|)` over all pixels.
    pub fn sup_norm(&self) -> f64 {
        self.px
            .iter()
            .chain(&self.py)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    /// Whether the field lies in the unit `l^inf` ball (to `1e-12`).
    pub fn is_feasible(&self) -> bool {
        self.sup_norm() <= 1.0 + 1e-12
    }

    /// Euclidean pairing `sum px*qx + py*qy`.
    pub fn dot(&self, other: &GradientField) -> f64 {
        let a: f64 = self.px.iter().zip(&other.px).map(|(a, b)| a * b).sum();
        let b: f64 = self.py.iter().zip(&other.py).map(|(a, b)| a * b).sum();
        a + b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Variation along `x`, i.e. jumps across vertical lines.
    Horizontal,
    /// Variation along `y`, i.e. jumps across horizontal lines.
    Vertical,
}

pub fn grad(u: &Image) -> GradientField {
    let mut p = GradientField::zeros(u.grid());
    grad_into(u.values(), u.grid(), &mut p.px, &mut p.py);
    p
}

pub(crate) fn grad_into(u: &[f64], grid: TorusGrid, px: &mut [f64], py: &mut [f64]) {
    let n = grid.n_pixels();
    let inv_h = n as f64;
    for j in 0..n {
        let row = j * n;
        let up = grid.next(j) * n;
        for i in 0..n - 1 {
            px[row + i] = (u[row + i + 1] - u[row + i]) * inv_h;
        }
        px[row + n - 1] = (u[row] - u[row + n - 1]) * inv_h;
        for i in 0..n {
            py[row + i] = (u[up + i] - u[row + i]) * inv_h;
        }
    }
}

pub fn div(p: &GradientField) -> Image {
    let grid = p.grid();
    let mut out = vec![0.0; grid.len()];
    div_into(&p.px, &p.py, grid, &mut out);
    Image::from_raw(grid, out)
}

/// Backward differences: `div = -grad^T` under the Euclidean pairing.
pub(crate) fn div_into(px: &[f64], py: &[f64], grid: TorusGrid, out: &mut [f64]) {
    let n = grid.n_pixels();
    let inv_h = n as f64;
    for j in 0..n {
        let row = j * n;
        let down = grid.prev(j) * n;
        out[row] = (px[row] - px[row + n - 1]) * inv_h;
        for i in 1..n {
            out[row + i] = (px[row + i] - px[row + i - 1]) * inv_h;
        }
        for i in 0..n {
            out[row + i] += (py[row + i] - py[down + i]) * inv_h;
        }
    }
}

/// `h^2 * sum(|px| + |py|)`, i.e. `h * sum` of absolute neighbour differences.
pub fn aniso_tv(u: &Image) -> f64 {
    aniso_tv_values(u.values(), u.grid())
}

pub(crate) fn aniso_tv_values(u: &[f64], grid: TorusGrid) -> f64 {
    let n = grid.n_pixels();
    let mut acc = 0.0;
    for j in 0..n {
        let row = j * n;
        let up = grid.next(j) * n;
        for i in 0..n {
            let right = row + grid.next(i);
            acc += (u[right] - u[row + i]).abs() + (u[up + i] - u[row + i]).abs();
        }
    }
    acc * grid.spacing()
}

/// Directional TV weighted by the squared distance to `lines`, restricted to
/// pixels where `region` is true. The difference between pixel `(i, j)` and
/// its forward neighbour sits on the shared edge and is weighted by the
/// distance of that edge's midpoint.
pub fn weighted_tv(u: &Image, lines: &LineSet, region: &[bool], direction: Direction) -> Result<f64> {
    let grid = u.grid();
    if region.len() != grid.len() {
        return Err(Error::Domain("region mask size mismatch".into()));
    }
    let n = grid.n_pixels();
    let h = grid.spacing();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if !region[grid.index(i, j)] {
                continue;
            }
            let (jump, x, y) = match direction {
                Direction::Horizontal => (u.at(grid.next(i), j) - u.at(i, j), (i + 1) as f64 * h, grid.center(j)),
                Direction::Vertical => (u.at(i, grid.next(j)) - u.at(i, j), grid.center(i), (j + 1) as f64 * h),
            };
            if jump != 0.0 {
                acc += lines.dist(x.rem_euclid(1.0), y.rem_euclid(1.0)).powi(2) * jump.abs();
            }
        }
    }
    Ok(acc * h)
}

fn same_grid(u: &Image, v: &Image) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(Error::Domain(format!(
            "grid mismatch: {} vs {} pixels",
            u.grid().n_pixels(),
            v.grid().n_pixels()
        )));
    }
    Ok(())
}

/// `||u - v||_{L^1}` on the unit torus.
pub fn l1_error(u: &Image, v: &Image) -> Result<f64> {
    same_grid(u, v)?;
    let area = u.grid().spacing().powi(2);
    Ok(area
        * u.values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Area of the symmetric difference of the superlevel sets `{u >= t}` and `{v >= t}`.
pub fn levelset_sym_diff(u: &Image, v: &Image, t: f64) -> Result<f64> {
    same_grid(u, v)?;
    let count = u
        .values()
        .iter()
        .zip(v.values())
        .filter(|(&a, &b)| (a >= t) != (b >= t))
        .count();
    Ok(count as f64 / u.grid().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::BlockImage;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(grid: TorusGrid, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(grid, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn grad_of_constant_and_half_indicator() {
        let grid = TorusGrid::new(8).unwrap();
        assert_eq!(grad(&Image::constant(grid, 3.0)).sup_norm(), 0.0);
        let u = Image::from_fn(grid, |i, _| if i < 4 { 1.0 } else { 0.0 });
        let g = grad(&u);
        for j in 0..8 {
            for i in 0..8 {
                let px = g.px[grid.index(i, j)];
                match i {
                    3 => assert_eq!(px, -8.0),
                    7 => assert_eq!(px, 8.0),
                    _ => assert_eq!(px, 0.0),
                }
            }
        }
        assert!(g.py.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn div_of_grad_is_five_point_laplacian() {
        let grid = TorusGrid::new(6).unwrap();
        let bump = Image::from_fn(grid, |i, j| if (i, j) == (2, 3) { 1.0 } else { 0.0 });
        let lap = div(&grad(&bump));
        let h2 = 36.0;
        for j in 0..6 {
            for i in 0..6 {
                let expected = bump.get(i as isize + 1, j as isize)
                    + bump.get(i as isize - 1, j as isize)
                    + bump.get(i as isize, j as isize + 1)
                    + bump.get(i as isize, j as isize - 1)
                    - 4.0 * bump.at(i, j);
                assert!((lap.at(i, j) - h2 * expected).abs() < 1e-12);
            }
        }
        assert!(div(&GradientField::zeros(grid)).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grad_div_adjoint_on_random_pairs() {
        let grid = TorusGrid::new(17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..100 {
            let u = random_image(grid, seed);
            let p = GradientField::new(
                grid,
                (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let lhs = grad(&u).dot(&p);
            let rhs = -u.values().iter().zip(div(&p).values()).map(|(a, b)| a * b).sum::<f64>();
            let scale: f64 = u.values().iter().map(|v| v.abs()).sum::<f64>() * 17.0 * 4.0;
            assert!((lhs - rhs).abs() <= 1e-12 * scale, "seed {seed}");
            let total: f64 = div(&p).values().iter().sum();
            let l1: f64 = p.px.iter().chain(&p.py).map(|v| v.abs()).sum();
            assert!(total.abs() <= 1e-10 * l1);
        }
    }

    #[test]
    fn tv_of_block_is_anisotropic_perimeter() {
        let grid = TorusGrid::new(40).unwrap();
        assert_eq!(aniso_tv(&Image::constant(grid, 7.0)), 0.0);
        // a = 0.25, b = 0.5: perimeter 2a + 2b = 1.5
        let block = Image::from_fn(grid, |i, j| if (5..15).contains(&i) && (8..28).contains(&j) { 1.0 } else { 0.0 });
        assert!((aniso_tv(&block) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn tv_matches_naive_sum() {
        let grid = TorusGrid::new(9).unwrap();
        let u = random_image(grid, 5);
        let mut naive = 0.0;
        for j in 0..9isize {
            for i in 0..9isize {
                naive += (u.get(i + 1, j) - u.get(i, j)).abs();
                naive += (u.get(i, j + 1) - u.get(i, j)).abs();
            }
        }
        assert!((aniso_tv(&u) - naive / 9.0).abs() < 1e-12);
    }

    #[test]
    fn tv_of_block_image_is_jump_sum() {
        let b = BlockImage::new(
            24,
            vec![0, 5, 13],
            vec![3, 16],
            vec![vec![0.0, 1.0], vec![0.5, 2.0], vec![-1.0, 0.25]],
        )
        .unwrap();
        let img = b.rasterize(TorusGrid::new(48).unwrap()).unwrap();
        let mut expected = 0.0;
        for line in b.lines() {
            for (seg, jump) in b.jumps(line).enumerate() {
                let len = match line {
                    crate::block::Line::Vertical(_) => b.row_height(seg),
                    crate::block::Line::Horizontal(_) => b.column_width(seg),
                };
                expected += jump.abs() * len;
            }
        }
        assert!((aniso_tv(&img) - expected).abs() < 1e-12);
    }

    #[test]
    fn weighted_tv_cases() {
        let grid = TorusGrid::new(20).unwrap();
        let everywhere = vec![true; grid.len()];
        let lines = LineSet::new(vec![0.25], vec![], 0.0).unwrap();
        let c = Image::constant(grid, 1.0);
        assert_eq!(weighted_tv(&c, &lines, &everywhere, Direction::Horizontal).unwrap(), 0.0);
        // jump on the line itself: x = 0.25 is the edge after pixel 4
        let on_line = Image::from_fn(grid, |i, _| if (5..15).contains(&i) { 2.0 } else { 0.0 });
        let only_left_edge: Vec<bool> = (0..grid.len()).map(|k| k % 20 == 4).collect();
        assert_eq!(weighted_tv(&on_line, &lines, &only_left_edge, Direction::Horizontal).unwrap(), 0.0);
        // jump at x = 0.75, distance 0.5 from the line, magnitude 2, length 1
        let right_edge: Vec<bool> = (0..grid.len()).map(|k| k % 20 == 14).collect();
        let w = weighted_tv(&on_line, &lines, &right_edge, Direction::Horizontal).unwrap();
        assert!((w - 0.25 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn l1_and_level_sets() {
        let grid = TorusGrid::new(10).unwrap();
        let u = random_image(grid, 2);
        assert_eq!(l1_error(&u, &u).unwrap(), 0.0);
        assert!((l1_error(&u, &u.map(|v| v + 1.0)).unwrap() - 1.0).abs() < 1e-12);
        let naive: f64 = (0..10)
            .flat_map(|j| (0..10).map(move |i| (i, j)))
            .map(|(i, j)| (u.at(i, j) - 0.5 * u.at(j, i)).abs() / 100.0)
            .sum();
        let v = Image::from_fn(grid, |i, j| 0.5 * u.at(j, i));
        assert!((l1_error(&u, &v).unwrap() - naive).abs() < 1e-12);
        let zero = Image::zeros(grid);
        let one = Image::constant(grid, 1.0);
        assert_eq!(levelset_sym_diff(&zero, &one, 0.5).unwrap(), 1.0);
        assert_eq!(levelset_sym_diff(&u, &u, 0.1).unwrap(), 0.0);
        assert!(l1_error(&u, &Image::zeros(TorusGrid::new(11).unwrap())).is_err());
    }

    /// Discrete form of the 1D interpolation inequality
    /// `||u||_1 <= sqrt(TV_{0}(u) * TV(u))` for `u` vanishing at the right end,
    /// with a slack of `2 h TV(u)` for the discretization.
    #[test]
    fn one_dimensional_interpolation_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let len = rng.random_range(4..200);
            let a = rng.random_range(0.1..1.0);
            let h = a / len as f64;
            let mut u: Vec<f64> = (0..len).map(|_| if rng.random_bool(0.3) { rng.random_range(-2.0..2.0) } else { 0.0 }).collect();
            // piecewise constant with a few jumps
            for k in 1..len {
                if rng.random_bool(0.8) {
                    u[k] = u[k - 1];
                }
            }
            u[len - 1] = 0.0;
            let l1: f64 = h * u.iter().map(|v| v.abs()).sum::<f64>();
            let mut tv = 0.0;
            let mut wtv = 0.0;
            for k in 0..len - 1 {
                let d = (u[k + 1] - u[k]).abs();
                let pos = (k + 1) as f64 * h;
                tv += d;
                wtv += pos * pos * d;
            }
            assert!(l1 <= (wtv * tv).sqrt() + 2.0 * h * tv + 1e-12, "l1 {l1} wtv {wtv} tv {tv}");
        }
    }

    proptest! {
        #[test]
        fn layer_cake_identity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let grid = TorusGrid::new(24).unwrap();
            let make = |rng: &mut ChaCha8Rng| {
                let xs = vec![0, rng.random_range(4..20)];
                let ys = vec![rng.random_range(0..10), rng.random_range(12..24)];
                let vals = (0..2).map(|_| (0..2).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
                BlockImage::new(24, xs, ys, vals).unwrap().rasterize(grid).unwrap()
            };
            let (u, v) = (make(&mut rng), make(&mut rng));
            let steps = 20_000;
            let dt = 1.0 / steps as f64;
            let integral: f64 = (0..steps)
                .map(|k| levelset_sym_diff(&u, &v, (k as f64 + 0.5) * dt).unwrap() * dt)
                .sum();
            prop_assert!((integral - l1_error(&u, &v).unwrap()).abs() < 1e-3);
        }
    }
}
