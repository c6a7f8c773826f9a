use super::{CoefficientDomain, CwtCoefficients, DyadicPartition};
use crate::error::{QmlError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSample {
    pub j: u32,
    pub a: f64,
    /// `||FT[X^j](a, ., .)||_{L^2_b L^2_xi2}`.
    pub value: f64,
    /// `a^(3/2) 2^-j` for `a <= 1`, `2^-j` above.
    pub bound: f64,
}

impl CoefficientSample {
    pub fn ratio(&self) -> f64 {
        self.value / self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBoundReport {
    /// Ratio at the reference point `a = 1, j = 0`.
    pub constant: f64,
    pub samples: Vec<CoefficientSample>,
    /// Largest `ratio / C` over `a <= 1`.
    pub worst_small: f64,
    /// Largest `ratio / C` over `1 <= a <= 4`.
    pub worst_large: f64,
    pub pass: bool,
}

pub fn decay_bound(a: f64, j: u32) -> f64 {
    let band = 2f64.powi(-(j as i32));
    if a <= 1.0 {
        a.powf(1.5) * band
    } else {
        band
    }
}

/// Band norms for every scale in `(0, 4]` and every band `0..=J`, checked against
/// `C a^(3/2) 2^-j` (`a <= 1`) and `C 2^-j` (`1 <= a <= 4`) with `C` fit at `a = 1, j = 0`.
pub fn coefficient_bound_check(x: &CwtCoefficients, part: &DyadicPartition) -> Result<CoefficientBoundReport> {
    if x.domain != CoefficientDomain::Spectral {
        return Err(QmlError::Domain("coefficient bounds need spectral coefficients".into()));
    }
    let g = x.grid;
    let weights: Vec<Vec<f64>> = (0..=part.j_max)
        .map(|j| (0..g.n).map(|s| part.band_weight(j, g.xi(s))).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let mut samples = Vec::new();
    for sl in x.slices.iter().filter(|s| s.a <= 4.0 * (1.0 + 1e-12)) {
        let db = 2.0 * g.half_width / sl.b.len() as f64;
        let mut col = vec![0.0; sl.values.ncols()];
        for row in sl.values.rows() {
            for (c, z) in col.iter_mut().zip(row) {
                *c += z.norm_sqr();
            }
        }
        for (j, w) in weights.iter().enumerate() {
            let m: f64 = col.iter().zip(w).map(|(c, w)| c * w * w).sum();
            let j = j as u32;
            samples.push(CoefficientSample { j, a: sl.a, value: (m * db * g.dxi()).sqrt(), bound: decay_bound(sl.a, j) });
        }
    }
    let reference = samples
        .iter()
        .find(|s| s.j == 0 && (s.a - 1.0).abs() < 1e-9)
        .ok_or_else(|| QmlError::Domain("scale grid does not contain the reference scale a = 1".into()))?;
    let constant = reference.ratio();
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(QmlError::Inconclusive("reference coefficient norm vanishes".into()));
    }
    let worst = |pick: &dyn Fn(f64) -> bool| {
        samples.iter().filter(|s| pick(s.a)).map(|s| s.ratio() / constant).fold(0.0, f64::max)
    };
    let worst_small = worst(&|a| a <= 1.0 + 1e-12);
    let worst_large = worst(&|a| a >= 1.0 - 1e-12);
    Ok(CoefficientBoundReport { constant, pass: worst_small <= 2.0 && worst_large <= 2.0, samples, worst_small, worst_large })
}
