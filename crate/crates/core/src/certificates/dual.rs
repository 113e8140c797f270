//! The three families of 2D dual certificates, assembled from 1D sign
//! interpolants and approximate characteristic functions.
//!
//! Every field is a finite sum of products `a(x) b(y)` of trigonometric
//! polynomials of degree `phi`, so its spectrum lies in `|k|_inf <= phi` and
//! its partial derivatives are in the range of the adjoint by construction.
//! Inequalities are checked on sample grids of `64 (phi+1)` points per axis
//! plus the jump lines.

use num_complex::Complex64;

use super::charfun::approx_char_len;
use super::interp::{
    bounds_at_radius, nearest, sample_grid, solve_sign_interpolation, verify_polynomial_bounds, CoefficientSystem,
    PolynomialBounds, SUP_TOL,
};
use super::trigpoly::TrigPoly;
use crate::block::BlockImage;
use crate::error::{Error, Result};
use crate::fourier::SpectralData;
use crate::torus::{Image, TorusGrid};

/// `g(x, y) = sum_j a_j(x) b_j(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableField {
    phi: usize,
    terms: Vec<(TrigPoly, TrigPoly)>,
}

impl SeparableField {
    pub fn new(phi: usize) -> Self {
        Self { phi, terms: Vec::new() }
    }

    pub fn push(&mut self, a: TrigPoly, b: TrigPoly) {
        assert!(a.degree() == self.phi && b.degree() == self.phi, "degree mismatch");
        self.terms.push((a, b));
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn terms(&self) -> &[(TrigPoly, TrigPoly)] {
        &self.terms
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|(a, b)| a.eval(x) * b.eval(y)).sum()
    }

    /// Values on the tensor grid `xs x ys`, indexed `[ix][iy]`.
    pub fn sample_on(&self, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
        let ax: Vec<Vec<f64>> = self.terms.iter().map(|(a, _)| xs.iter().map(|&x| a.eval(x)).collect()).collect();
        let by: Vec<Vec<f64>> = self.terms.iter().map(|(_, b)| ys.iter().map(|&y| b.eval(y)).collect()).collect();
        (0..xs.len())
            .map(|i| {
                (0..ys.len())
                    .map(|j| ax.iter().zip(&by).map(|(a, b)| a[i] * b[j]).sum())
                    .collect()
            })
            .collect()
    }

    /// The field sampled at the pixel nodes of `grid`.
    pub fn to_image(&self, grid: TorusGrid) -> Image {
        let nodes: Vec<f64> = (0..grid.n_pixels()).map(|i| grid.node(i)).collect();
        let values = self.sample_on(&nodes, &nodes);
        Image::from_fn(grid, |i, j| values[i][j])
    }

    /// Fourier coefficients on `|k|_inf <= phi`.
    pub fn spectral(&self) -> SpectralData {
        let p = self.phi as i64;
        let mut coeffs = Vec::with_capacity((2 * self.phi + 1).pow(2));
        for k1 in -p..=p {
            for k2 in -p..=p {
                coeffs.push(self.terms.iter().map(|(a, b)| a.coeff(k1) * b.coeff(k2)).sum::<Complex64>());
            }
        }
        SpectralData::from_coeffs(self.phi, coeffs).expect("coefficient count matches the cutoff")
    }
}

/// A named worst-case slack; nonnegative when its condition holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    pub name: String,
    pub value: f64,
}

/// Certificate fields `g^v`, `g^h` together with verified constants.
#[derive(Debug, Clone)]
pub struct CertificateBundle {
    pub phi: usize,
    pub g_v: SeparableField,
    pub g_h: SeparableField,
    pub r: f64,
    pub kappa: f64,
    pub eta: f64,
    pub margins: Vec<Margin>,
    /// Segment or flag notes that do not invalidate the bundle.
    pub notes: Vec<String>,
}

impl CertificateBundle {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.value).fold(f64::INFINITY, f64::min)
    }

    pub fn is_valid(&self) -> bool {
        self.min_margin() >= 0.0
    }

    /// Spectral support within the cutoff; holds by construction.
    pub fn support_within_cutoff(&self) -> bool {
        [&self.g_v, &self.g_h]
            .iter()
            .all(|g| g.phi == self.phi && g.terms.iter().all(|(a, b)| a.degree() <= self.phi && b.degree() <= self.phi))
    }
}

fn push_margins(out: &mut Vec<Margin>, prefix: &str, b: &PolynomialBounds) {
    for (name, value) in [
        ("outside", b.margins.outside),
        ("near", b.margins.near),
        ("deviation", b.margins.deviation),
        ("sup", b.margins.sup),
    ] {
        out.push(Margin {
            name: format!("{prefix}.{name}"),
            value,
        });
    }
}

/// Certificate built from one sign interpolant per direction.
#[derive(Debug, Clone)]
pub struct CertificateI {
    pub bundle: CertificateBundle,
    pub vertical: CoefficientSystem,
    pub horizontal: CoefficientSystem,
    pub vertical_bounds: PolynomialBounds,
    pub horizontal_bounds: PolynomialBounds,
}

/// `g^v(x, y) = h^v(x)` and `g^h(x, y) = h^h(y)`, where `h^v` interpolates the
/// vertical line signs at the `x_m` and `h^h` the horizontal ones at the `y_n`.
/// Since each field depends on one variable, the 2D bounds reduce to the 1D
/// bounds of the interpolants, which are checked at a common radius.
pub fn build_certificate_i(block: &BlockImage, phi: usize) -> Result<CertificateI> {
    let report = block.check_assumption_1();
    if !report.holds {
        return Err(Error::Precondition(report.violations.len()));
    }
    let vertical = solve_sign_interpolation(&block.xs(), block.sign_v(), phi)?;
    let horizontal = solve_sign_interpolation(&block.ys(), block.sign_h(), phi)?;
    let r = verify_polynomial_bounds(&vertical)?
        .r
        .min(verify_polynomial_bounds(&horizontal)?.r);
    let vb = bounds_at_radius(&vertical, r)?;
    let hb = bounds_at_radius(&horizontal, r)?;

    let one = TrigPoly::constant(phi, 1.0);
    let mut g_v = SeparableField::new(phi);
    g_v.push(vertical.poly(), one.clone());
    let mut g_h = SeparableField::new(phi);
    g_h.push(one, horizontal.poly());

    let mut margins = vec![
        Margin {
            name: "v.dominance".into(),
            value: vertical.dominance_margin,
        },
        Margin {
            name: "h.dominance".into(),
            value: horizontal.dominance_margin,
        },
    ];
    push_margins(&mut margins, "v", &vb);
    push_margins(&mut margins, "h", &hb);
    Ok(CertificateI {
        bundle: CertificateBundle {
            phi,
            g_v,
            g_h,
            r,
            kappa: vb.kappa.min(hb.kappa),
            eta: vb.eta.max(hb.eta),
            margins,
            notes: Vec::new(),
        },
        vertical,
        horizontal,
        vertical_bounds: vb,
        horizontal_bounds: hb,
    })
}

/// `(2 * 0.73^2 - 1)`, the normalized cell-integral constant of the existence proof.
pub const CELL_INTEGRAL_CONSTANT: f64 = 2.0 * 0.73 * 0.73 - 1.0;

/// Cell-integral certificate for the recovery of the block values.
#[derive(Debug, Clone)]
pub struct CertificateII {
    pub phi: usize,
    pub field: SeparableField,
    pub signs: Vec<Vec<i8>>,
    /// `s_mn * int_cell g / area`, indexed `[m][n]`; zero where `s_mn = 0`.
    pub normalized: Vec<Vec<f64>>,
    pub min_normalized: f64,
    /// Location `(m, n)` of the minimum.
    pub worst: (usize, usize),
}

impl CertificateII {
    /// Every signed cell integral is strictly positive.
    pub fn is_valid(&self) -> bool {
        self.min_normalized > 0.0
    }
}

fn check_signs(signs: &[Vec<i8>], m: usize, n: usize) -> Result<()> {
    if signs.len() != m || signs.iter().any(|row| row.len() != n) {
        return Err(Error::Domain(format!("sign matrix must be {m} x {n}")));
    }
    if signs.iter().flatten().any(|s| !(-1..=1).contains(s)) {
        return Err(Error::Domain("signs must lie in {-1, 0, 1}".into()));
    }
    Ok(())
}

fn column_chars(block: &BlockImage, phi: usize) -> Vec<TrigPoly> {
    let xs = block.xs();
    (0..block.m()).map(|m| approx_char_len(xs[m], block.column_width(m), phi)).collect()
}

fn row_chars(block: &BlockImage, phi: usize) -> Vec<TrigPoly> {
    let ys = block.ys();
    (0..block.n()).map(|n| approx_char_len(ys[n], block.row_height(n), phi)).collect()
}

/// `g(x, y) = sum_mn s_mn chi_m(x) chi_n(y)` with the approximate
/// characteristic functions of the columns and rows. Cell integrals are exact.
pub fn build_certificate_ii(block: &BlockImage, signs: &[Vec<i8>], phi: usize) -> Result<CertificateII> {
    check_signs(signs, block.m(), block.n())?;
    let delta = block.delta();
    let threshold = 3.0 / (phi as f64 + 1.0);
    if delta * (phi as f64 + 1.0) < 3.0 - 1e-9 {
        return Err(Error::Separation {
            margin: delta - threshold,
            delta,
            phi,
        });
    }
    let cx = column_chars(block, phi);
    let cy = row_chars(block, phi);
    let xs = block.xs();
    let ys = block.ys();

    let mut field = SeparableField::new(phi);
    for (m, chi_x) in cx.iter().enumerate() {
        let mut s_m = TrigPoly::zero(phi);
        for (n, chi_y) in cy.iter().enumerate() {
            s_m.add_scaled(chi_y, signs[m][n] as f64);
        }
        field.push(chi_x.clone(), s_m);
    }

    // ix[m'][m] = int over column m of chi_m'
    let ix: Vec<Vec<f64>> = cx
        .iter()
        .map(|c| (0..block.m()).map(|m| c.integral(xs[m], block.column_width(m))).collect())
        .collect();
    let iy: Vec<Vec<f64>> = cy
        .iter()
        .map(|c| (0..block.n()).map(|n| c.integral(ys[n], block.row_height(n))).collect())
        .collect();

    let mut normalized = vec![vec![0.0; block.n()]; block.m()];
    let mut min_normalized = f64::INFINITY;
    let mut worst = (0, 0);
    for m in 0..block.m() {
        for n in 0..block.n() {
            let s = signs[m][n];
            if s == 0 {
                continue;
            }
            let mut integral = 0.0;
            for mp in 0..block.m() {
                for np in 0..block.n() {
                    integral += signs[mp][np] as f64 * ix[mp][m] * iy[np][n];
                }
            }
            let v = s as f64 * integral / (block.column_width(m) * block.row_height(n));
            normalized[m][n] = v;
            if v < min_normalized {
                min_normalized = v;
                worst = (m, n);
            }
        }
    }
    Ok(CertificateII {
        phi,
        field,
        signs: signs.to_vec(),
        normalized,
        min_normalized,
        worst,
    })
}

/// Paper constant for the normalized segment integrals.
pub const SEGMENT_CONSTANT: f64 = 0.3;
/// Segment integrals below this fail; between this and [`SEGMENT_CONSTANT`]
/// they are only noted.
pub const SEGMENT_FLOOR: f64 = 0.25;

/// Segment-integral certificate for the modified minimizer.
#[derive(Debug, Clone)]
pub struct CertificateIII {
    pub bundle: CertificateBundle,
    /// `s^v_mn int_{y_n}^{y_{n+1}} g^v(x_m, y) dy / length`, indexed `[m][n]`.
    pub segments_v: Vec<Vec<f64>>,
    /// `s^h_mn int_{x_m}^{x_{m+1}} g^h(x, y_n) dx / length`, indexed `[m][n]`.
    pub segments_h: Vec<Vec<f64>>,
    pub min_segment: f64,
}

struct Family {
    field: SeparableField,
    r: f64,
    eta: f64,
    sup_margin: f64,
    deviation_margin: f64,
    segments: Vec<Vec<f64>>,
}

/// One direction of certificate III. `lines` are the coordinates across which
/// the field interpolates, `chars` the approximate characteristic functions of
/// the intervals in the other variable, and `signs[i][j]` the sign of line `i`
/// on interval `j`. The returned field has the line variable first.
fn family(lines: &[f64], chars: &[TrigPoly], cells: &[(f64, f64)], signs: &[Vec<i8>], phi: usize) -> Result<Family> {
    let count = lines.len();
    let mut spikes = Vec::with_capacity(count);
    for i in 0..count {
        let s: Vec<i8> = (0..count).map(|j| (i == j) as i8).collect();
        spikes.push(solve_sign_interpolation(lines, &s, phi)?.poly());
    }
    // the sum of the single spikes is the all-ones interpolant
    let ones = solve_sign_interpolation(lines, &vec![1; count], phi)?;
    let r = verify_polynomial_bounds(&ones)?.r;

    let mut field = SeparableField::new(phi);
    let mut factors = Vec::with_capacity(count);
    for (i, spike) in spikes.iter().enumerate() {
        let mut s_i = TrigPoly::zero(phi);
        for (j, chi) in chars.iter().enumerate() {
            s_i.add_scaled(chi, signs[i][j] as f64);
        }
        field.push(spike.clone(), s_i.clone());
        factors.push(s_i);
    }

    let ts = sample_grid(phi, lines);
    let spike_at: Vec<Vec<f64>> = spikes.iter().map(|g| ts.iter().map(|&t| g.eval(t)).collect()).collect();
    let spike_at_line: Vec<Vec<f64>> = spikes.iter().map(|g| lines.iter().map(|&t| g.eval(t)).collect()).collect();

    // eta from sum_i |g_i(t) - g_i(t_bar)| / d^2 within R of a line
    let mut eta: f64 = 0.0;
    let near: Vec<(usize, usize, f64)> = ts
        .iter()
        .enumerate()
        .filter_map(|(k, &t)| {
            let (bar, d) = nearest(lines, t);
            (d <= r && d >= super::interp::MIN_QUOTIENT_DIST).then_some((k, bar, d))
        })
        .collect();
    for &(k, bar, d) in &near {
        let s: f64 = (0..count).map(|i| (spike_at[i][k] - spike_at_line[i][bar]).abs()).sum();
        eta = eta.max(s / (d * d));
    }
    let eta = eta * 1.001;

    let other = sample_grid(phi, &cells.iter().map(|c| c.0).collect::<Vec<_>>());
    let factor_at: Vec<Vec<f64>> = factors.iter().map(|f| other.iter().map(|&t| f.eval(t)).collect()).collect();
    let mut sup_margin = f64::INFINITY;
    let mut worst_sup = (0.0, 0.0);
    for (k, &t) in ts.iter().enumerate() {
        for (l, &u) in other.iter().enumerate() {
            let v: f64 = (0..count).map(|i| spike_at[i][k] * factor_at[i][l]).sum();
            let m = 1.0 + SUP_TOL - v.abs();
            if m < sup_margin {
                sup_margin = m;
                worst_sup = (t, u);
            }
        }
    }
    if sup_margin < 0.0 {
        return Err(Error::CertificateFailure {
            condition: "|g| <= 1".into(),
            excess: -sup_margin,
            location: format!("line coordinate {:.6}, other {:.6}", worst_sup.0, worst_sup.1),
        });
    }

    let mut deviation_margin = f64::INFINITY;
    for &(k, bar, d) in &near {
        for l in 0..other.len() {
            let dev: f64 = (0..count)
                .map(|i| (spike_at[i][k] - spike_at_line[i][bar]) * factor_at[i][l])
                .sum();
            deviation_margin = deviation_margin.min(eta * d * d - dev.abs());
        }
    }
    if deviation_margin < 0.0 {
        return Err(Error::CertificateFailure {
            condition: "quadratic deviation at lines".into(),
            excess: -deviation_margin,
            location: format!("eta = {eta:.4e}"),
        });
    }

    let segments: Vec<Vec<f64>> = (0..count)
        .map(|bar| {
            cells
                .iter()
                .enumerate()
                .map(|(j, &(start, len))| {
                    let integral: f64 = (0..count)
                        .map(|i| spike_at_line[i][bar] * factors[i].integral(start, len))
                        .sum();
                    signs[bar][j] as f64 * integral / len
                })
                .collect()
        })
        .collect();
    Ok(Family {
        field,
        r,
        eta,
        sup_margin,
        deviation_margin,
        segments,
    })
}

/// `g^v(x, y) = sum_m g_m(x) sum_n s^v_mn chi_n(y)` with `g_m` the single-spike
/// interpolant at `x_m`, and symmetrically `g^h`. Checks `|g| <= 1`, the
/// quadratic deviation from the nearest line within `R`, and the normalized
/// segment integrals against [`SEGMENT_FLOOR`].
pub fn build_certificate_iii(
    block: &BlockImage,
    signs_v: &[Vec<i8>],
    signs_h: &[Vec<i8>],
    phi: usize,
) -> Result<CertificateIII> {
    check_signs(signs_v, block.m(), block.n())?;
    check_signs(signs_h, block.m(), block.n())?;
    let xs = block.xs();
    let ys = block.ys();
    let rows: Vec<(f64, f64)> = (0..block.n()).map(|n| (ys[n], block.row_height(n))).collect();
    let cols: Vec<(f64, f64)> = (0..block.m()).map(|m| (xs[m], block.column_width(m))).collect();

    let v = family(&xs, &row_chars(block, phi), &rows, signs_v, phi)?;
    // transpose so the horizontal lines index the outer dimension
    let signs_ht: Vec<Vec<i8>> = (0..block.n()).map(|n| (0..block.m()).map(|m| signs_h[m][n]).collect()).collect();
    let h = family(&ys, &column_chars(block, phi), &cols, &signs_ht, phi)?;

    let mut g_h = SeparableField::new(phi);
    for (a, b) in &h.field.terms {
        g_h.push(b.clone(), a.clone());
    }
    let segments_h: Vec<Vec<f64>> = (0..block.m()).map(|m| (0..block.n()).map(|n| h.segments[n][m]).collect()).collect();

    let mut min_segment = f64::INFINITY;
    let mut worst = String::new();
    let mut notes = Vec::new();
    for (name, seg, signs) in [("v", &v.segments, signs_v), ("h", &segments_h, signs_h)] {
        for m in 0..block.m() {
            for n in 0..block.n() {
                if signs[m][n] == 0 {
                    continue;
                }
                let s = seg[m][n];
                if s < min_segment {
                    min_segment = s;
                    worst = format!("{name} segment ({m}, {n})");
                }
                if s < SEGMENT_CONSTANT {
                    notes.push(format!("{name} segment ({m}, {n}) = {s:.4} below {SEGMENT_CONSTANT}"));
                }
            }
        }
    }
    if min_segment < SEGMENT_FLOOR {
        return Err(Error::CertificateFailure {
            condition: "segment integral".into(),
            excess: SEGMENT_FLOOR - min_segment,
            location: worst,
        });
    }

    let margins = vec![
        Margin {
            name: "v.sup".into(),
            value: v.sup_margin,
        },
        Margin {
            name: "h.sup".into(),
            value: h.sup_margin,
        },
        Margin {
            name: "v.deviation".into(),
            value: v.deviation_margin,
        },
        Margin {
            name: "h.deviation".into(),
            value: h.deviation_margin,
        },
        Margin {
            name: "segment".into(),
            value: if min_segment.is_finite() { min_segment - SEGMENT_FLOOR } else { f64::INFINITY },
        },
    ];
    Ok(CertificateIII {
        bundle: CertificateBundle {
            phi,
            g_v: v.field,
            g_h,
            r: v.r.min(h.r),
            kappa: f64::NAN,
            eta: v.eta.max(h.eta),
            margins,
            notes,
        },
        segments_v: v.segments,
        segments_h,
        min_segment,
    })
}
