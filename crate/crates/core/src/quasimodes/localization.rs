use crate::error::{QmlError, Result};
use crate::grid::{semiclassical_fft, Field2D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationReport {
    pub radius: f64,
    /// Fraction of `||u||^2` carried by `|x| > radius`.
    pub x_outside: f64,
    /// Fraction of `||FT[u]||^2` carried by `|xi| > radius` (physical frequency, carrier included).
    pub xi_outside: f64,
}

impl LocalizationReport {
    pub fn worst(&self) -> f64 {
        self.x_outside.max(self.xi_outside)
    }
}

pub fn localization_check(u: &Field2D, radius: f64) -> Result<LocalizationReport> {
    let g = u.grid;
    if !(radius > 0.0 && radius < g.half_width) {
        return Err(QmlError::Domain(format!("radius must lie in (0, L = {}), got {radius}", g.half_width)));
    }
    let r2 = radius * radius;
    let (mut xin, mut xout) = (0.0, 0.0);
    for ((i, j), z) in u.values.indexed_iter() {
        let d = g.x(i).powi(2) + g.x(j).powi(2);
        if d > r2 {
            xout += z.norm_sqr();
        } else {
            xin += z.norm_sqr();
        }
    }
    let s = semiclassical_fft(u)?;
    let (mut kin, mut kout) = (0.0, 0.0);
    for ((s1, s2), z) in s.values.indexed_iter() {
        let xi = s.frequency(s1, s2);
        if xi[0] * xi[0] + xi[1] * xi[1] > r2 {
            kout += z.norm_sqr();
        } else {
            kin += z.norm_sqr();
        }
    }
    let frac = |a: f64, b: f64| if a + b > 0.0 { b / (a + b) } else { 0.0 };
    Ok(LocalizationReport { radius, x_outside: frac(xin, xout), xi_outside: frac(kin, kout) })
}
