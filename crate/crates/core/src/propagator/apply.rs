use super::phase::PhaseTable;
use crate::error::{QmlError, Result};
use crate::grid::{fft_line, ifft_line, Field1D, Field2D, GridSpec};
use crate::symbols::SymbolSpec;
use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Rows outside the phase horizon may carry at most this fraction of the squared mass.
pub const HORIZON_MASS_TOL: f64 = 1e-10;

fn carrier_free(g: &Field1D) -> Vec<Complex64> {
    if g.carrier == 0.0 {
        return g.values.clone();
    }
    let grid = g.grid;
    g.values.iter().enumerate().map(|(j, z)| z * Complex64::from_polar(1.0, g.carrier * grid.x(j) / grid.h)).collect()
}

fn check_grid(table: &PhaseTable, g: &GridSpec) -> Result<()> {
    if table.grid != *g {
        return Err(QmlError::Shape("field grid differs from the phase table grid".into()));
    }
    Ok(())
}

fn apply_w_values(table: &PhaseTable, ti: usize, g: &[Complex64]) -> Vec<Complex64> {
    let grid = &table.grid;
    let (n, h, dx) = (grid.n, grid.h, grid.dx());
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (k, &s) in table.xi_index.iter().enumerate() {
        let (phi, b) = (table.phase_row(ti, k), table.amp_row(ti, k));
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if g[j] != Complex64::new(0.0, 0.0) {
                acc += Complex64::from_polar(b[j], -phi[j] / h) * g[j];
            }
        }
        spec[s] = acc * dx;
    }
    let scale = 1.0 / (2.0 * PI * h).sqrt();
    ifft_line(&spec, grid).into_iter().map(|z| z * scale).collect()
}

fn apply_w_star_values(table: &PhaseTable, ti: usize, f: &[Complex64]) -> Vec<Complex64> {
    let grid = &table.grid;
    let (n, h) = (grid.n, grid.h);
    let big_h: Vec<Complex64> = fft_line(f, grid).into_iter().map(|z| z * (2.0 * PI * h).sqrt()).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, &s) in table.xi_index.iter().enumerate() {
        let (phi, b) = (table.phase_row(ti, k), table.amp_row(ti, k));
        let c = big_h[s];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..n {
            out[j] += Complex64::from_polar(b[j], phi[j] / h) * c;
        }
    }
    let scale = grid.dxi() / (2.0 * PI * h);
    out.into_iter().map(|z| z * scale).collect()
}

/// `W(x1) g(x2) = (2 pi h)^{-1} int int e^{i (x2 xi2 - phi(x1, y2, xi2)) / h} b g(y2) dy2 dxi2`,
/// discretized on the grid and the kept lattice frequencies.
pub fn apply_w(table: &PhaseTable, x1: f64, g: &Field1D) -> Result<Field1D> {
    check_grid(table, &g.grid)?;
    let ti = table.usable_time(x1)?;
    Field1D::new(g.grid, 0.0, apply_w_values(table, ti, &carrier_free(g)))
}

/// Exact discrete adjoint of [`apply_w`] in the grid inner product.
pub fn apply_w_star(table: &PhaseTable, x1: f64, f: &Field1D) -> Result<Field1D> {
    check_grid(table, &f.grid)?;
    let ti = table.usable_time(x1)?;
    Field1D::new(f.grid, 0.0, apply_w_star_values(table, ti, &carrier_free(f)))
}

/// `e^{-i x1 a(hD_x2) / h} g` on the full lattice, for `x`-independent graph symbols.
pub fn apply_multiplier(a: &SymbolSpec, x1: f64, g: &Field1D) -> Result<Field1D> {
    let gf = a.graph_fn().ok_or_else(|| QmlError::Domain(format!("{} is not a graph symbol", a.label())))?;
    if gf.is_x_dependent() {
        return Err(QmlError::Domain(format!("{} depends on x; no exact multiplier", a.label())));
    }
    let grid = g.grid;
    let mut spec = fft_line(&carrier_free(g), &grid);
    for (s, z) in spec.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, -x1 * gf.eval(x1, 0.0, grid.xi(s)) / grid.h);
    }
    Field1D::new(grid, 0.0, ifft_line(&spec, &grid))
}

fn row_map(
    table: &PhaseTable,
    u: &Field2D,
    shift: f64,
    f: fn(&PhaseTable, usize, &[Complex64]) -> Vec<Complex64>,
) -> Result<Field2D> {
    check_grid(table, &u.grid)?;
    let g = u.grid;
    let n = g.n;
    let total: f64 = u.values.iter().map(|z| z.norm_sqr()).sum();
    let rows: Vec<Option<usize>> = (0..n).map(|i| table.usable_time(g.x(i)).ok()).collect();
    let outside: f64 =
        (0..n).filter(|&i| rows[i].is_none()).map(|i| u.values.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
    if outside > HORIZON_MASS_TOL * total {
        return Err(QmlError::Caustic(format!(
            "{:.3e} of the mass lies on rows without a usable phase (horizon {:?})",
            outside / total,
            table.horizon
        )));
    }
    let c2 = u.carrier[1];
    let out: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| match rows[i] {
            Some(ti) => {
                let row: Vec<Complex64> = (0..n)
                    .map(|j| u.values[[i, j]] * Complex64::from_polar(1.0, c2 * g.x(j) / g.h))
                    .collect();
                let turn = Complex64::from_polar(1.0, shift * g.x(i) / g.h);
                f(table, ti, &row).into_iter().map(|z| z * turn).collect()
            }
            None => vec![Complex64::new(0.0, 0.0); n],
        })
        .collect();
    Field2D::with_carrier(g, [u.carrier[0] - shift, 0.0], Array2::from_shape_fn((n, n), |(i, j)| out[i][j]))
}

/// `v(x1, .) = W(x1) u(x1, .)` row by row; rows past the horizon must be negligible and are zeroed.
/// The x1 carrier of the result is lowered by [`PhaseTable::x1_carrier_shift`].
pub fn quasimode_pushforward(table: &PhaseTable, u: &Field2D) -> Result<Field2D> {
    row_map(table, u, table.x1_carrier_shift(), apply_w_values)
}

/// `u(x1, .) = W(x1)^* v(x1, .)` row by row; the x1 carrier is raised by the same shift.
pub fn quasimode_pullback(table: &PhaseTable, v: &Field2D) -> Result<Field2D> {
    row_map(table, v, -table.x1_carrier_shift(), apply_w_star_values)
}
