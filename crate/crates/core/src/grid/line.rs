use super::{check_finite, fft::plan, GridSpec};
use crate::error::{QmlError, Result};
use num_complex::Complex64;
use rustfft::FftDirection;
use std::f64::consts::PI;

/// Complex samples on one axis of a [`GridSpec`], with an optional carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub grid: GridSpec,
    pub carrier: f64,
    pub values: Vec<Complex64>,
}

impl Field1D {
    pub fn new(grid: GridSpec, carrier: f64, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n {
            return Err(QmlError::Shape(format!("expected {} samples, got {}", grid.n, values.len())));
        }
        check_finite(values.iter())?;
        Ok(Field1D { grid, carrier, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, 0.0, (0..grid.n).map(|i| f(grid.x(i))).collect())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub fn inner(&self, other: &Field1D) -> Complex64 {
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.dx()
    }
}

/// 1-D semiclassical transform onto the centred lattice, scale `dx / sqrt(2 pi h)`.
pub fn fft_line(values: &[Complex64], grid: &GridSpec) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    plan(n, FftDirection::Forward).process(&mut buf);
    let scale = grid.dx() / (2.0 * PI * grid.h).sqrt();
    (0..n)
        .map(|s| {
            let z = buf[(s + n / 2) % n] * scale;
            if s % 2 == 0 {
                z
            } else {
                -z
            }
        })
        .collect()
}

pub fn ifft_line(spec: &[Complex64], grid: &GridSpec) -> Vec<Complex64> {
    let n = spec.len();
    let scale = (2.0 * PI * grid.h).sqrt() / grid.dx() / n as f64;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let s = (k + n / 2) % n;
            let z = spec[s] * scale;
            if s % 2 == 0 {
                z
            } else {
                -z
            }
        })
        .collect();
    plan(n, FftDirection::Inverse).process(&mut buf);
    buf
}
