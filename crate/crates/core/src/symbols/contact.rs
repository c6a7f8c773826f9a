use super::{graph_of, Graph, SymbolSpec};
use crate::error::{QmlError, Result};
use std::fmt;

/// Relative threshold below which a derivative of `g1 - g2` counts as zero.
pub const CONTACT_TOL: f64 = 1e-8;

const FD_STEP: f64 = 0.02;
const RICHARDSON_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactOrder {
    Finite(u32),
    Infinite,
}

impl fmt::Display for ContactOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactOrder::Finite(k) => write!(f, "{k}"),
            ContactOrder::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactMethod {
    ClosedForm,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactReport {
    pub xi0: [f64; 2],
    pub order: ContactOrder,
    pub first_nonzero_derivative: Option<f64>,
    /// `d^r (g1 - g2)` for `r = 1..=` the first non-vanishing order (or `max_order + 1`).
    pub derivative_table: Vec<f64>,
    pub tolerances: Vec<f64>,
    /// Some derivative fell within `[tol / 10, tol]`.
    pub inconclusive: bool,
    /// `|g1''(xi2_0)|`.
    pub curvature: f64,
    pub method: ContactMethod,
}

/// Contact order of the characteristic graphs at `x = 0`.
pub fn contact_order(a: &SymbolSpec, q: &SymbolSpec, xi0: [f64; 2], max_order: usize) -> Result<ContactReport> {
    contact_order_at(a, q, [0.0, 0.0], xi0, max_order)
}

pub fn contact_order_at(
    a: &SymbolSpec,
    q: &SymbolSpec,
    x: [f64; 2],
    xi0: [f64; 2],
    max_order: usize,
) -> Result<ContactReport> {
    if max_order < 1 {
        return Err(QmlError::Domain("max_order must be at least 1".into()));
    }
    let g1 = graph_of(a, x)?;
    let g2 = graph_of(q, x)?;
    let top = max_order + 1;
    let (d1, d2, method) = match (g1.closed_derivatives(xi0[1], top), g2.closed_derivatives(xi0[1], top)) {
        (Some(d1), Some(d2)) => (d1?, d2?, ContactMethod::ClosedForm),
        _ => (fd_table(&g1, xi0[1], top)?, fd_table(&g2, xi0[1], top)?, ContactMethod::FiniteDifference),
    };
    let miss = |v: f64| (v - xi0[0]).abs() > CONTACT_TOL * (1.0 + xi0[0].abs());
    if miss(d1[0]) || miss(d2[0]) {
        return Err(QmlError::Domain(format!(
            "graphs do not meet at xi0 = {xi0:?}: g1 = {}, g2 = {}",
            d1[0], d2[0]
        )));
    }
    let mut table = Vec::new();
    let mut tols = Vec::new();
    let mut inconclusive = false;
    let mut cnorm = d1[0].abs();
    for r in 1..=top {
        cnorm = cnorm.max(d1[r].abs());
        let tol = CONTACT_TOL * (1.0 + cnorm);
        let d = d1[r] - d2[r];
        table.push(d);
        tols.push(tol);
        if d.abs() >= tol / 10.0 && d.abs() <= tol {
            inconclusive = true;
        }
        if d.abs() > tol {
            return Ok(ContactReport {
                xi0,
                order: ContactOrder::Finite(r as u32 - 1),
                first_nonzero_derivative: Some(d),
                derivative_table: table,
                tolerances: tols,
                inconclusive,
                curvature: d1.get(2).map_or(f64::NAN, |v| v.abs()),
                method,
            });
        }
    }
    Ok(ContactReport {
        xi0,
        order: ContactOrder::Infinite,
        first_nonzero_derivative: None,
        derivative_table: table,
        tolerances: tols,
        inconclusive,
        curvature: d1.get(2).map_or(f64::NAN, |v| v.abs()),
        method,
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central `r`-th difference with step `d`.
fn central_difference(g: &Graph, t: f64, r: usize, d: f64) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..=r {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binomial(r, i) * g.eval(t + (r as f64 / 2.0 - i as f64) * d)?;
    }
    Ok(s / d.powi(r as i32))
}

/// Richardson extrapolation in `d^2` over halved steps.
fn richardson(g: &Graph, t: f64, r: usize) -> Result<f64> {
    let mut row: Vec<f64> = (0..RICHARDSON_LEVELS)
        .map(|l| central_difference(g, t, r, FD_STEP / (1 << l) as f64))
        .collect::<Result<_>>()?;
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    Ok(row[0])
}

fn fd_table(g: &Graph, t: f64, top: usize) -> Result<Vec<f64>> {
    let mut d = vec![g.eval(t)?];
    for r in 1..=top {
        d.push(richardson(g, t, r)?);
    }
    Ok(d)
}
