use crate::error::{QmlError, Result};
use crate::grid::{semiclassical_fft, Field2D};
use crate::symbols::{apply_left_quantization, SymbolSpec};
use ndarray::Axis;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub label: String,
    pub m1: u32,
    pub m2: u32,
    pub h: f64,
    /// `||p1^M1 p2^M2 u|| / ||u||`.
    pub defect: f64,
    /// `defect / h^(M1 + M2)`.
    pub ratio_to_power: f64,
}

impl DefectReport {
    pub fn csv_header() -> &'static str {
        "label,h,M1,M2,defect,ratio_to_power"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{:e},{},{},{:e},{:e}", self.label, self.h, self.m1, self.m2, self.defect, self.ratio_to_power)
    }
}

pub fn defect(op: &SymbolSpec, u: &Field2D, m: u32) -> Result<DefectReport> {
    if m < 1 {
        return Err(QmlError::Domain("defect power must be at least 1".into()));
    }
    let mut r = joint_defect(op, &SymbolSpec::xi2_power(0), u, m, 0)?;
    r.label = format!("{}^{m}", op.label());
    Ok(r)
}

/// Relative norm of `p1(x,hD)^M1 p2(x,hD)^M2 u`.
///
/// When both symbols are x-independent the powers are applied as a single spectral multiplier.
pub fn joint_defect(p1: &SymbolSpec, p2: &SymbolSpec, u: &Field2D, m1: u32, m2: u32) -> Result<DefectReport> {
    let base = u.l2_norm();
    if base == 0.0 {
        return Err(QmlError::Domain("defect of the zero field is undefined".into()));
    }
    let h = u.grid.h;
    let num = if !p1.is_x_dependent() && !p2.is_x_dependent() {
        multiplier_norm(p1, p2, u, m1, m2)?
    } else {
        let mut v = u.clone();
        for _ in 0..m2 {
            v = apply_left_quantization(p2, &v)?;
        }
        for _ in 0..m1 {
            v = apply_left_quantization(p1, &v)?;
        }
        v.l2_norm()
    };
    let d = num / base;
    if !d.is_finite() {
        return Err(QmlError::NonFinite(0));
    }
    Ok(DefectReport {
        label: format!("{}^{m1} {}^{m2}", p1.label(), p2.label()),
        m1,
        m2,
        h,
        defect: d,
        ratio_to_power: d / h.powi((m1 + m2) as i32),
    })
}

fn multiplier_norm(p1: &SymbolSpec, p2: &SymbolSpec, u: &Field2D, m1: u32, m2: u32) -> Result<f64> {
    let s = semiclassical_fft(u)?;
    let g = s.grid;
    let c = s.carrier;
    let rows: Vec<f64> = s
        .values
        .axis_iter(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(s1, row)| {
            let xi1 = c[0] + g.xi(s1);
            row.iter()
                .enumerate()
                .map(|(s2, z)| {
                    let xi = [xi1, c[1] + g.xi(s2)];
                    let w = p1.value([0.0; 2], xi).powi(m1 as i32) * p2.value([0.0; 2], xi).powi(m2 as i32);
                    z.norm_sqr() * w * w
                })
                .sum()
        })
        .collect();
    Ok((rows.iter().sum::<f64>() * g.dxi() * g.dxi()).sqrt())
}
