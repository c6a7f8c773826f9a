use super::{CoefficientDomain, CwtCoefficients};
use crate::error::{QmlError, Result};
use crate::grid::{Field2D, GridSpec};
use crate::quasimodes::smoothstep;
use num_complex::Complex64;

/// Smooth partition `chi0(s) + sum_{j=1..J} chi(2^-j s) = 1` for `|s| <= 2^J`, with
/// `s = h^(-1/(k+1)) |xi2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    pub h: f64,
    pub k: u32,
    /// Smallest `J` with `2^J h^(1/(k+1)) >= 1`.
    pub j_max: u32,
}

impl DyadicPartition {
    pub fn new(h: f64, k: u32) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) || k == 0 {
            return Err(QmlError::Domain(format!("dyadic partition needs h in (0, 1] and k >= 1, got h = {h}, k = {k}")));
        }
        let scale = h.powf(1.0 / (k as f64 + 1.0));
        let mut j = 0u32;
        while 2f64.powi(j as i32) * scale < 1.0 {
            j += 1;
        }
        Ok(DyadicPartition { h, k, j_max: j })
    }

    /// `h^(1/(k+1))`.
    pub fn unit(&self) -> f64 {
        self.h.powf(1.0 / (self.k as f64 + 1.0))
    }

    /// Equal to one on `|s| <= 1` and zero for `|s| >= 3/2`.
    pub fn plateau(s: f64) -> f64 {
        1.0 - smoothstep((s.abs() - 1.0) * 2.0)
    }

    /// Supported in `|s| <= 3/2`.
    pub fn chi0(s: f64) -> f64 {
        Self::plateau(s)
    }

    /// Supported in `1/2 <= |t| <= 3/2`.
    pub fn chi(t: f64) -> f64 {
        Self::plateau(t) - Self::plateau(2.0 * t)
    }

    /// Cutoff of band `j` evaluated at frequency `xi2`.
    pub fn band_weight(&self, j: u32, xi2: f64) -> Result<f64> {
        if j > self.j_max {
            return Err(QmlError::Domain(format!("band {j} outside 0..={}", self.j_max)));
        }
        let s = xi2.abs() / self.unit();
        Ok(if j == 0 { Self::chi0(s) } else { Self::chi(s / 2f64.powi(j as i32)) })
    }
}

/// Restricts spectral coefficients to band `j`.
pub fn dyadic_project(x: &CwtCoefficients, part: &DyadicPartition, j: u32) -> Result<CwtCoefficients> {
    if x.domain != CoefficientDomain::Spectral {
        return Err(QmlError::Domain("dyadic projection needs spectral coefficients".into()));
    }
    let g = x.grid;
    let weights: Vec<f64> = (0..g.n).map(|s| part.band_weight(j, g.xi(s))).collect::<Result<_>>()?;
    let mut out = x.clone();
    out.band = Some(j);
    for sl in &mut out.slices {
        for mut row in sl.values.rows_mut() {
            for (z, w) in row.iter_mut().zip(&weights) {
                *z *= *w;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientNorm {
    pub a_requested: f64,
    pub a: f64,
    pub value: f64,
    pub warning: Option<String>,
}

/// `L^2` norm over `(b, xi2)` at one scale; off-grid scales snap to the nearest one in `log a`.
pub fn coefficient_norm(x: &CwtCoefficients, fixed_a: f64) -> Result<CoefficientNorm> {
    if !(fixed_a > 0.0) || x.slices.is_empty() {
        return Err(QmlError::Domain(format!("no scale available near a = {fixed_a}")));
    }
    let sl = x
        .slices
        .iter()
        .min_by(|p, q| (p.a.ln() - fixed_a.ln()).abs().total_cmp(&(q.a.ln() - fixed_a.ln()).abs()))
        .expect("nonempty");
    let warning = if (sl.a - fixed_a).abs() > 1e-9 * fixed_a {
        Some(format!("scale {fixed_a} not on grid; using {}", sl.a))
    } else {
        None
    };
    let g = x.grid;
    let db = 2.0 * g.half_width / sl.b.len() as f64;
    let d2 = match x.domain {
        CoefficientDomain::Spectral => g.dxi(),
        CoefficientDomain::Physical => g.dx(),
    };
    let rows: Vec<f64> = sl.values.rows().into_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
    let value = (rows.iter().sum::<f64>() * db * d2).sqrt();
    Ok(CoefficientNorm { a_requested: fixed_a, a: sl.a, value, warning })
}

/// Unit-norm flat-model quasimode: a Gaussian of width `sigma1` in `x1` times a Gaussian in `x2`
/// whose semiclassical spectrum has width `spread * h^(1/(k+1))`.
pub fn flat_model_field(grid: GridSpec, k: u32, sigma1: f64, spread: f64) -> Result<Field2D> {
    if !(sigma1 > 0.0 && spread > 0.0) || k == 0 {
        return Err(QmlError::Domain("flat model needs positive widths and k >= 1".into()));
    }
    let h = grid.h;
    let s2 = h / (spread * h.powf(1.0 / (k as f64 + 1.0)));
    let v = Field2D::from_fn(grid, |x1, x2| {
        Complex64::new((-(x1 * x1) / (2.0 * sigma1 * sigma1) - x2 * x2 / (2.0 * s2 * s2)).exp(), 0.0)
    })?;
    let n = v.l2_norm();
    Ok(v.scaled(1.0 / n))
}
