use crate::error::{QmlError, Result};
use crate::grid::{semiclassical_ifft, Field2D, GridSpec, SpectralField2D};
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Spectral height `h^(-1/2 - alpha)`, i.e. the prefactor `h^(-3/2 - alpha) / (2 pi)` in front of the
    /// unnormalized inverse transform.
    AnalyticPrefactor,
    /// Rescaled so that the discrete `L^2` norm is one.
    UnitL2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TAlphaSpec {
    pub h: f64,
    pub alpha: f64,
    pub omega0: [f64; 2],
    pub normalization: Normalization,
    /// Replace the sharp indicator by a smooth step of width `h / 8` inside the rectangle.
    pub smoothed_edges: bool,
}

/// Half-width used by [`TAlphaSpec::default_grid`]; gives lattice spacing exactly `h / 4`.
pub const T_ALPHA_HALF_WIDTH: f64 = 4.0 * PI;

pub const MIN_SUPPORT_POINTS: usize = 8;

impl TAlphaSpec {
    pub fn new(h: f64, alpha: f64) -> Result<Self> {
        let s = TAlphaSpec { h, alpha, omega0: [1.0, 0.0], normalization: Normalization::UnitL2, smoothed_edges: false };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(QmlError::Domain(format!("h must lie in (0, 1], got {}", self.h)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(QmlError::Domain(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        let r = (self.omega0[0].powi(2) + self.omega0[1].powi(2)).sqrt();
        if (r - 1.0).abs() > 1e-12 {
            return Err(QmlError::Domain("omega0 must be a unit vector".into()));
        }
        Ok(())
    }

    /// Largest angular half-width, `h^alpha` capped at `pi`.
    pub fn arc(&self) -> f64 {
        self.h.powf(self.alpha).min(PI)
    }

    /// Largest offset of the polar rectangle from `omega0` along either lattice axis.
    pub fn extent(&self) -> f64 {
        let theta0 = self.omega0[1].atan2(self.omega0[0]);
        let mut m: f64 = 0.0;
        for &r in &[1.0 - self.h, 1.0 + self.h] {
            for k in 0..=256 {
                let t = theta0 + self.arc() * (2.0 * k as f64 / 256.0 - 1.0);
                m = m.max((r * t.cos() - self.omega0[0]).abs()).max((r * t.sin() - self.omega0[1]).abs());
            }
        }
        m
    }

    /// Smallest power-of-two grid on `[-4 pi, 4 pi]^2` whose lattice covers the rectangle with margin.
    pub fn default_grid(&self) -> Result<GridSpec> {
        self.validate()?;
        let need = 1.25 * self.extent() + 2.0 * self.h;
        let mut n = 16usize;
        while PI * self.h * n as f64 / (2.0 * T_ALPHA_HALF_WIDTH) < need {
            n *= 2;
        }
        GridSpec::new(T_ALPHA_HALF_WIDTH, n, self.h)
    }

    /// Weight of `chi_alpha` at frequency `xi`.
    pub fn weight(&self, xi: [f64; 2]) -> f64 {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let dtheta = angle_between(xi, self.omega0);
        let (dr, da) = (self.h - (r - 1.0).abs(), self.arc() - dtheta.abs());
        if dr <= 0.0 || da <= 0.0 {
            return 0.0;
        }
        if !self.smoothed_edges {
            return 1.0;
        }
        let w = self.h / 8.0;
        smoothstep(dr / w) * smoothstep(da / w)
    }
}

fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = b[0] * a[1] - b[1] * a[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.atan2(dot)
}

/// `C^infinity` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    psi(t) / (psi(t) + psi(1.0 - t))
}

/// Spectral samples of `T^h_alpha` on the lattice centred at `omega0`, before normalization.
pub fn t_alpha_spectrum(spec: &TAlphaSpec, grid: &GridSpec) -> Result<(SpectralField2D, usize)> {
    spec.validate()?;
    grid.validate()?;
    if (grid.h - spec.h).abs() > 1e-15 * spec.h {
        return Err(QmlError::Domain(format!("grid h = {} differs from spec h = {}", grid.h, spec.h)));
    }
    if grid.dxi() > spec.h / 4.0 * (1.0 + 1e-12) {
        return Err(QmlError::UnderResolved(format!(
            "lattice spacing {:.3e} exceeds h/4 = {:.3e}",
            grid.dxi(),
            spec.h / 4.0
        )));
    }
    if spec.extent() >= grid.nyquist() - grid.dxi() {
        return Err(QmlError::UnderResolved(format!(
            "polar rectangle (extent {:.4}) exceeds the lattice half-width {:.4}",
            spec.extent(),
            grid.nyquist()
        )));
    }
    let n = grid.n;
    let c = spec.omega0;
    let mut count = 0usize;
    let values = Array2::from_shape_fn((n, n), |(s1, s2)| {
        let w = spec.weight([c[0] + grid.xi(s1), c[1] + grid.xi(s2)]);
        if w > 0.0 {
            count += 1;
        }
        Complex64::new(w, 0.0)
    });
    if count < MIN_SUPPORT_POINTS {
        return Err(QmlError::UnderResolved(format!(
            "only {count} lattice points inside the polar rectangle (need {MIN_SUPPORT_POINTS})"
        )));
    }
    Ok((SpectralField2D::new(*grid, c, values)?, count))
}

/// `T^h_alpha` sampled on `grid`, stored with carrier `omega0`.
pub fn build_t_alpha(spec: &TAlphaSpec, grid: &GridSpec) -> Result<Field2D> {
    let (mut s, _) = t_alpha_spectrum(spec, grid)?;
    match spec.normalization {
        Normalization::AnalyticPrefactor => {
            let height = spec.h.powf(-0.5 - spec.alpha);
            s.values.mapv_inplace(|z| z * height);
            semiclassical_ifft(&s)
        }
        Normalization::UnitL2 => {
            let norm = s.l2_norm();
            s.values.mapv_inplace(|z| z / norm);
            let u = semiclassical_ifft(&s)?;
            let m = u.l2_norm();
            Ok(u.scaled(1.0 / m))
        }
    }
}
