//! Uniform periodic grids on `[-L, L]^2`, complex fields and the semiclassical
//! Fourier transform.
//!
//! Fields may carry a frequency `carrier` `c`: the physical samples are
//! `exp(i <x, c> / h) * values`, and the spectral lattice of such a field is
//! shifted by `c`. This keeps highly oscillatory fields with narrow spectra
//! representable on modest grids.

pub(crate) mod fft;
mod line;
mod norms;

pub use fft::{semiclassical_fft, semiclassical_ifft};
pub use line::{fft_line, ifft_line, Field1D};
pub use norms::{lp_norm, restrict_norm, slice_csv, Rect, RestrictedNorm, SliceAxis};

use crate::error::{QmlError, Result};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

pub const DEFAULT_HALF_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub n: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, n: usize, h: f64) -> Result<Self> {
        let g = GridSpec { half_width, n, h };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || self.n % 2 != 0 {
            return Err(QmlError::InvalidGrid(format!(
                "points per axis must be even and >= 16, got {}",
                self.n
            )));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(QmlError::InvalidGrid(format!(
                "half width must be positive, got {}",
                self.half_width
            )));
        }
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(QmlError::InvalidGrid(format!("h must lie in (0, 1], got {}", self.h)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Spacing of the semiclassical frequency lattice, `pi h / L`.
    pub fn dxi(&self) -> f64 {
        PI * self.h / self.half_width
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    /// Lattice frequency at centred index `s` (so `m = s - N/2`).
    pub fn xi(&self, s: usize) -> f64 {
        (s as f64 - (self.n / 2) as f64) * self.dxi()
    }

    /// Centred index of the lattice point nearest to `xi`, if inside the lattice.
    pub fn xi_index(&self, xi: f64) -> Option<usize> {
        let m = (xi / self.dxi()).round() + (self.n / 2) as f64;
        if m >= 0.0 && m < self.n as f64 {
            Some(m as usize)
        } else {
            None
        }
    }

    /// Half-width of the discrete frequency range `[-pi h N / (2L), pi h N / (2L))`.
    pub fn nyquist(&self) -> f64 {
        PI * self.h * self.n as f64 / (2.0 * self.half_width)
    }

    pub fn resolves_unit_band(&self) -> bool {
        self.nyquist() > 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: GridSpec,
    pub carrier: [f64; 2],
    /// Row index is the x1 index, column index the x2 index.
    pub values: Array2<Complex64>,
}

impl Field2D {
    pub fn new(grid: GridSpec, values: Array2<Complex64>) -> Result<Self> {
        Self::with_carrier(grid, [0.0, 0.0], values)
    }

    pub fn with_carrier(grid: GridSpec, carrier: [f64; 2], values: Array2<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.dim() != (grid.n, grid.n) {
            return Err(QmlError::Shape(format!(
                "expected {0}x{0} samples, got {1:?}",
                grid.n,
                values.dim()
            )));
        }
        if !(carrier[0].is_finite() && carrier[1].is_finite()) {
            return Err(QmlError::Domain("carrier must be finite".into()));
        }
        check_finite(values.iter())?;
        Ok(Field2D { grid, carrier, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field2D { grid, carrier: [0.0, 0.0], values: Array2::zeros((grid.n, grid.n)) }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let values = Array2::from_shape_fn((grid.n, grid.n), |(i, j)| f(grid.x(i), grid.x(j)));
        Self::new(grid, values)
    }

    /// Physical sample at `(i, j)`, including the carrier modulation.
    pub fn physical(&self, i: usize, j: usize) -> Complex64 {
        let g = &self.grid;
        let phase = (self.carrier[0] * g.x(i) + self.carrier[1] * g.x(j)) / g.h;
        self.values[[i, j]] * Complex64::from_polar(1.0, phase)
    }

    /// Copy with the carrier folded into the samples.
    pub fn materialize(&self) -> Field2D {
        if self.carrier == [0.0, 0.0] {
            return self.clone();
        }
        let values = Array2::from_shape_fn(self.values.dim(), |(i, j)| self.physical(i, j));
        Field2D { grid: self.grid, carrier: [0.0, 0.0], values }
    }

    pub fn l2_norm(&self) -> f64 {
        norms::l2(&self.grid, &self.values)
    }

    pub fn scaled(&self, s: f64) -> Field2D {
        Field2D { grid: self.grid, carrier: self.carrier, values: self.values.mapv(|z| z * s) }
    }

    /// `self - other`, requiring identical grids and carriers.
    pub fn sub(&self, other: &Field2D) -> Result<Field2D> {
        self.compatible(other)?;
        Ok(Field2D { grid: self.grid, carrier: self.carrier, values: &self.values - &other.values })
    }

    pub fn add(&self, other: &Field2D) -> Result<Field2D> {
        self.compatible(other)?;
        Ok(Field2D { grid: self.grid, carrier: self.carrier, values: &self.values + &other.values })
    }

    fn compatible(&self, other: &Field2D) -> Result<()> {
        if self.grid != other.grid || self.carrier != other.carrier {
            return Err(QmlError::Shape("fields live on different grids or carriers".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    pub grid: GridSpec,
    pub carrier: [f64; 2],
    /// Centred lattice order: entry `[s1, s2]` sits at `carrier + (xi(s1), xi(s2))`.
    pub values: Array2<Complex64>,
    pub warnings: Vec<String>,
}

impl SpectralField2D {
    pub fn new(grid: GridSpec, carrier: [f64; 2], values: Array2<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.dim() != (grid.n, grid.n) {
            return Err(QmlError::Shape(format!("expected {0}x{0} spectral samples", grid.n)));
        }
        check_finite(values.iter())?;
        Ok(SpectralField2D { grid, carrier, values, warnings: Vec::new() })
    }

    /// Physical frequency of lattice entry `[s1, s2]`.
    pub fn frequency(&self, s1: usize, s2: usize) -> [f64; 2] {
        [self.carrier[0] + self.grid.xi(s1), self.carrier[1] + self.grid.xi(s2)]
    }

    pub fn l2_norm(&self) -> f64 {
        let dxi = self.grid.dxi();
        let rows: Vec<f64> = self.values.rows().into_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
        (rows.iter().sum::<f64>() * dxi * dxi).sqrt()
    }
}

pub(crate) fn check_finite<'a>(it: impl Iterator<Item = &'a Complex64>) -> Result<()> {
    for (k, z) in it.enumerate() {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(QmlError::NonFinite(k));
        }
    }
    Ok(())
}
