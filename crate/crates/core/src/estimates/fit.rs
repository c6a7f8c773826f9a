use crate::error::{QmlError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub label: String,
    pub slope: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    /// Largest `|log value - (intercept + slope log h)|`.
    pub residual: f64,
    pub h_values: Vec<f64>,
}

/// Least-squares line through `(log h, log value)`.
pub fn fit_power_law(label: &str, rows: &[(f64, f64)]) -> Result<ExponentFit> {
    if rows.len() < 3 {
        return Err(QmlError::Domain(format!("power-law fit needs at least 3 rows, got {}", rows.len())));
    }
    for &(h, v) in rows {
        if !(h > 0.0 && h.is_finite()) || !(v > 0.0 && v.is_finite()) {
            return Err(QmlError::Domain(format!("power-law fit needs positive finite data, got ({h}, {v})")));
        }
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(QmlError::Domain("power-law fit needs at least two distinct h".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    Ok(ExponentFit { label: label.to_string(), slope, intercept, residual, h_values: rows.iter().map(|r| r.0).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_laws() {
        let hs: Vec<f64> = (5..10).map(|e| 2f64.powi(-e)).collect();
        let f = fit_power_law("q", &hs.iter().map(|&h| (h, h.powf(-0.25))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12 && f.residual < 1e-12);
        let f = fit_power_law("q", &hs.iter().map(|&h| (h, 7.0 * h.powf(-1.0 / 6.0))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope + 1.0 / 6.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
        assert_eq!(f.h_values, hs);
    }

    #[test]
    fn residual_sees_outlier() {
        let rows = [(0.5, 1.0), (0.25, 1.0), (0.125, std::f64::consts::E), (0.0625, 1.0)];
        let f = fit_power_law("q", &rows).unwrap();
        assert!(f.residual > 0.5);
    }

    #[test]
    fn refusals() {
        assert!(fit_power_law("q", &[(0.5, 1.0), (0.25, 2.0)]).is_err());
        assert!(fit_power_law("q", &[(0.5, 1.0), (0.25, 0.0), (0.125, 1.0)]).is_err());
        assert!(fit_power_law("q", &[(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)]).is_err());
        assert!(fit_power_law("q", &[(-0.5, 1.0), (0.25, 2.0), (0.125, 1.0)]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_slope(s in -2.0f64..2.0, c in 0.1f64..10.0, n in 3usize..8) {
            let rows: Vec<(f64, f64)> = (0..n).map(|i| {
                let h = 2f64.powi(-(i as i32) - 2);
                (h, c * h.powf(s))
            }).collect();
            let f = fit_power_law("q", &rows).unwrap();
            prop_assert!((f.slope - s).abs() < 1e-10);
            prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
        }
    }
}
