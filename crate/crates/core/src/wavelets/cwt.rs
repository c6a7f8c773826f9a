use super::{admissibility_constant, WaveletSpec};
use crate::error::{QmlError, Result};
use crate::grid::fft::plan;
use crate::grid::{fft_line, ifft_line, Field1D, Field2D, GridSpec};
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use std::collections::BTreeMap;

pub const SCALES_PER_DECADE: u32 = 48;

/// Quadrature nodes per wavelet half-support in the analysis integral.
const ANALYSIS_NODES: f64 = 8.0;

/// Log-spaced scales `a_m = 10^(m / per_decade)` with `m_min <= m <= m_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleGrid {
    pub per_decade: u32,
    pub m_min: i32,
    pub m_max: i32,
}

impl ScaleGrid {
    /// All anchored scales inside `[a_min, a_max]`.
    pub fn covering(a_min: f64, a_max: f64, per_decade: u32) -> Result<Self> {
        if !(a_min > 0.0 && a_max >= a_min && a_max.is_finite()) || per_decade == 0 {
            return Err(QmlError::Domain(format!("invalid scale range [{a_min}, {a_max}]")));
        }
        let pd = per_decade as f64;
        let m_min = (pd * a_min.log10() - 1e-9).ceil() as i32;
        let m_max = (pd * a_max.log10() + 1e-9).floor() as i32;
        if m_max < m_min {
            return Err(QmlError::Domain(format!("no anchored scale inside [{a_min}, {a_max}]")));
        }
        Ok(ScaleGrid { per_decade, m_min, m_max })
    }

    /// Default range `[max(2 dx, h), 4]` with a small margin above `2 dx`.
    pub fn default_for(grid: &GridSpec) -> Result<Self> {
        Self::covering((2.0 * grid.dx() * (1.0 + 1e-9)).max(grid.h), 4.0f64.min(grid.half_width), SCALES_PER_DECADE)
    }

    pub fn scale(&self, m: i32) -> f64 {
        10f64.powf(m as f64 / self.per_decade as f64)
    }

    pub fn scales(&self) -> Vec<f64> {
        (self.m_min..=self.m_max).map(|m| self.scale(m)).collect()
    }

    /// `d(ln a)` between neighbouring scales.
    pub fn log_step(&self) -> f64 {
        std::f64::consts::LN_10 / self.per_decade as f64
    }
}

/// Translations for scale `a`: spacing close to `a / 4`, periodic on `[-L, L)`.
pub fn translations(grid: &GridSpec, a: f64) -> Vec<f64> {
    let nb = ((8.0 * grid.half_width / a).ceil() as usize).max(1);
    let db = 2.0 * grid.half_width / nb as f64;
    (0..nb).map(|i| -grid.half_width + i as f64 * db).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientDomain {
    /// `X(a, b, x2)`.
    Physical,
    /// `FT[X](a, b, xi2)` on the centred lattice.
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSlice {
    pub m: i32,
    pub a: f64,
    pub b: Vec<f64>,
    /// Row index is the translation, column index `x2` (or `xi2`).
    pub values: Array2<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwtCoefficients {
    pub grid: GridSpec,
    pub scales: ScaleGrid,
    pub domain: CoefficientDomain,
    pub band: Option<u32>,
    /// Number of `x2` columns: `N` for planar fields, one for a single line.
    pub width: usize,
    pub slices: Vec<ScaleSlice>,
}

impl CwtCoefficients {
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for s in &mut z.slices {
            s.values.fill(Complex64::new(0.0, 0.0));
        }
        z
    }

    pub fn a_grid(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.a).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (s, o) in out.slices.iter_mut().zip(&other.slices) {
            s.values += &o.values;
        }
        out.band = if self.band == other.band { self.band } else { None };
        Ok(out)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.scales != other.scales || self.domain != other.domain {
            return Err(QmlError::Shape("coefficient sets live on different grids".into()));
        }
        Ok(())
    }

    /// Validates shapes against the grids; used by decoders.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.width != 1 && self.width != self.grid.n {
            return Err(QmlError::Shape(format!("coefficient width {} is neither 1 nor N", self.width)));
        }
        let want = self.scales.scales();
        if want.len() != self.slices.len() {
            return Err(QmlError::Shape("scale count does not match the scale grid".into()));
        }
        for (s, &a) in self.slices.iter().zip(&want) {
            let nb = translations(&self.grid, a).len();
            if s.values.dim() != (nb, self.width) || s.b.len() != nb {
                return Err(QmlError::Shape(format!("slice at a = {a} has shape {:?}", s.values.dim())));
            }
            crate::grid::check_finite(s.values.iter())?;
        }
        Ok(())
    }
}

/// Trigonometric interpolation of every column of `v` onto `r` times as many `x1` samples.
fn upsample_x1(v: &Array2<Complex64>, r: usize) -> Array2<Complex64> {
    if r == 1 {
        return v.clone();
    }
    let (n, cols) = v.dim();
    let nr = n * r;
    let fwd = plan(n, FftDirection::Forward);
    let inv = plan(nr, FftDirection::Inverse);
    let columns: Vec<Vec<Complex64>> = (0..cols)
        .into_par_iter()
        .map(|j| {
            let mut buf: Vec<Complex64> = v.column(j).to_vec();
            fwd.process(&mut buf);
            let mut big = vec![Complex64::new(0.0, 0.0); nr];
            let half = n / 2;
            for k in 0..half {
                big[k] = buf[k];
            }
            for k in half + 1..n {
                big[nr - n + k] = buf[k];
            }
            // Split the Nyquist mode symmetrically.
            big[half] = buf[half] * 0.5;
            big[nr - half] = buf[half] * 0.5;
            inv.process(&mut big);
            big.iter().map(|z| z / n as f64).collect()
        })
        .collect();
    Array2::from_shape_fn((nr, cols), |(i, j)| columns[j][i])
}

/// Samples `pref * f(t)` and removes the discrete mean along a smooth bump, so constants in
/// `x1` are annihilated exactly rather than to quadrature accuracy.
fn zero_sum_weights(w: &WaveletSpec, t: impl Iterator<Item = f64>, pref: f64) -> Vec<f64> {
    let t: Vec<f64> = t.collect();
    let mut wts: Vec<f64> = t.iter().map(|&t| w.f(t) * pref).collect();
    let bump: Vec<f64> = t.iter().map(|&t| (1.0 - (t / w.support).powi(2)).max(0.0).powi(4)).collect();
    let (s, b): (f64, f64) = (wts.iter().sum(), bump.iter().sum());
    if b > 0.0 {
        for (x, y) in wts.iter_mut().zip(&bump) {
            *x -= s * y / b;
        }
    }
    wts
}

fn oversampling(grid: &GridSpec, a: f64) -> usize {
    let mut r = 1;
    while grid.dx() / r as f64 > a / ANALYSIS_NODES {
        r *= 2;
    }
    r
}

/// `X(a, b, x2) = a^(-1/2) int f((y - b) / a) v(y, x2) dy` by a periodic Riemann sum.
///
/// The integrand is sampled on a trigonometrically refined `x1` grid with at least
/// eight nodes per wavelet half-support.
pub fn cwt_forward(v: &Field2D, w: &WaveletSpec, scales: &ScaleGrid) -> Result<CwtCoefficients> {
    let v = v.materialize();
    analyze(&v.values, &v.grid, w, scales)
}

/// Transform of a single line in `x1`.
pub fn cwt_forward_line(v: &Field1D, w: &WaveletSpec, scales: &ScaleGrid) -> Result<CwtCoefficients> {
    let g = v.grid;
    let values = Array2::from_shape_fn((g.n, 1), |(i, _)| v.values[i] * Complex64::from_polar(1.0, v.carrier * g.x(i) / g.h));
    analyze(&values, &g, w, scales)
}

fn analyze(values: &Array2<Complex64>, g: &GridSpec, w: &WaveletSpec, scales: &ScaleGrid) -> Result<CwtCoefficients> {
    let g = *g;
    let a_min = scales.scale(scales.m_min);
    let a_max = scales.scale(scales.m_max);
    if a_min <= 2.0 * g.dx() {
        return Err(QmlError::UnderResolved(format!("smallest scale {a_min} is not above 2 dx = {}", 2.0 * g.dx())));
    }
    if a_max * w.support > g.half_width {
        return Err(QmlError::Domain(format!("largest scale {a_max} exceeds the box half-width {}", g.half_width)));
    }
    crate::grid::check_finite(values.iter())?;
    let width = values.ncols();
    let n = g.n;
    let mut refined: BTreeMap<usize, Array2<Complex64>> = BTreeMap::new();
    let mut slices = Vec::new();
    for m in scales.m_min..=scales.m_max {
        let a = scales.scale(m);
        let r = oversampling(&g, a);
        let vr = refined.entry(r).or_insert_with(|| upsample_x1(values, r));
        let nr = n * r;
        let dy = g.dx() / r as f64;
        let b = translations(&g, a);
        let pref = dy / a.sqrt();
        let reach = a * w.support;
        let rows: Vec<Vec<Complex64>> = b
            .par_iter()
            .map(|&bb| {
                let lo = ((bb - reach + g.half_width) / dy).ceil() as i64;
                let hi = ((bb + reach + g.half_width) / dy).floor() as i64;
                let mut row = vec![Complex64::new(0.0, 0.0); width];
                let weights = zero_sum_weights(w, (lo..=hi).map(|q| (-g.half_width + q as f64 * dy - bb) / a), pref);
                for (q, &wt) in (lo..=hi).zip(&weights) {
                    if wt == 0.0 {
                        continue;
                    }
                    let src = vr.row(q.rem_euclid(nr as i64) as usize);
                    for (o, s) in row.iter_mut().zip(src.iter()) {
                        *o += s * wt;
                    }
                }
                row
            })
            .collect();
        let values = Array2::from_shape_fn((b.len(), width), |(i, j)| rows[i][j]);
        slices.push(ScaleSlice { m, a, b, values });
    }
    Ok(CwtCoefficients { grid: g, scales: *scales, domain: CoefficientDomain::Physical, band: None, width, slices })
}

/// `v(x) = (2 / C_f) int_{a > 0} int a^(-5/2) X(a, b, x2) f((x1 - b) / a) da db`.
///
/// Positive scales only, hence the factor two against `C_f` over the whole line.
pub fn cwt_inverse(x: &CwtCoefficients, w: &WaveletSpec) -> Result<Field2D> {
    if x.width != x.grid.n {
        return Err(QmlError::Shape("line coefficients need cwt_inverse_line".into()));
    }
    let x = if x.domain == CoefficientDomain::Spectral { spatial_coefficients(x)? } else { x.clone() };
    Field2D::new(x.grid, synthesize(&x, w)?)
}

pub fn cwt_inverse_line(x: &CwtCoefficients, w: &WaveletSpec) -> Result<Field1D> {
    if x.width != 1 || x.domain != CoefficientDomain::Physical {
        return Err(QmlError::Shape("expected physical line coefficients".into()));
    }
    let v = synthesize(x, w)?;
    Field1D::new(x.grid, 0.0, v.column(0).to_vec())
}

fn synthesize(x: &CwtCoefficients, w: &WaveletSpec) -> Result<Array2<Complex64>> {
    x.validate()?;
    let c_f = admissibility_constant(w)?;
    let g = x.grid;
    let n = g.n;
    let width = x.width;
    let dlog = x.scales.log_step();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x1 = g.x(i);
            let mut row = vec![Complex64::new(0.0, 0.0); width];
            for s in &x.slices {
                let a = s.a;
                let db = 2.0 * g.half_width / s.b.len() as f64;
                // da = a dlog, so the weight is a^(-3/2) dlog db.
                let pref = 2.0 / c_f * a.powf(-1.5) * dlog * db;
                let nb = s.b.len() as i64;
                let reach = a * w.support;
                let lo = ((x1 - reach + g.half_width) / db).ceil() as i64;
                let hi = ((x1 + reach + g.half_width) / db).floor() as i64;
                for q in lo..=hi {
                    let bb = -g.half_width + q as f64 * db;
                    let wt = w.f((x1 - bb) / a) * pref;
                    if wt == 0.0 {
                        continue;
                    }
                    let src = s.values.row(q.rem_euclid(nb) as usize);
                    for (o, z) in row.iter_mut().zip(src.iter()) {
                        *o += z * wt;
                    }
                }
            }
            row
        })
        .collect();
    Ok(Array2::from_shape_fn((n, width), |(i, j)| rows[i][j]))
}

/// 1-D semiclassical transform in the `x2` slot of every `(a, b)`.
pub fn spectral_coefficients(x: &CwtCoefficients) -> Result<CwtCoefficients> {
    map_slices(x, CoefficientDomain::Spectral, |row, g| fft_line(row, g))
}

pub fn spatial_coefficients(x: &CwtCoefficients) -> Result<CwtCoefficients> {
    map_slices(x, CoefficientDomain::Physical, |row, g| ifft_line(row, g))
}

fn map_slices(
    x: &CwtCoefficients,
    target: CoefficientDomain,
    f: impl Fn(&[Complex64], &GridSpec) -> Vec<Complex64> + Sync,
) -> Result<CwtCoefficients> {
    if x.width != x.grid.n {
        return Err(QmlError::Shape("the x2 transform needs full-width coefficients".into()));
    }
    if x.domain == target {
        return Ok(x.clone());
    }
    let mut out = x.clone();
    out.domain = target;
    for s in &mut out.slices {
        s.values.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut row| {
            let t = f(row.as_slice().expect("standard layout"), &x.grid);
            for (o, v) in row.iter_mut().zip(t) {
                *o = v;
            }
        });
    }
    Ok(out)
}
