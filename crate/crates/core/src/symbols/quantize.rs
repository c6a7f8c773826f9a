use super::SymbolSpec;
use crate::error::{QmlError, Result};
use crate::grid::{semiclassical_fft, semiclassical_ifft, Field2D};
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest grid the direct `O(N^4)` quadrature accepts without an override.
pub const DIRECT_QUANTIZATION_MAX_N: usize = 128;

#[derive(Debug, Clone, Copy, Default)]
pub struct QuantizeOptions {
    pub allow_large: bool,
}

pub fn apply_left_quantization(sym: &SymbolSpec, u: &Field2D) -> Result<Field2D> {
    apply_left_quantization_with(sym, u, QuantizeOptions::default())
}

/// `p(x, hD) u` in the left quantization.
pub fn apply_left_quantization_with(sym: &SymbolSpec, u: &Field2D, opts: QuantizeOptions) -> Result<Field2D> {
    let mut spec = semiclassical_fft(u)?;
    let g = u.grid;
    if !sym.is_x_dependent() {
        let n = g.n;
        let c = spec.carrier;
        spec.values.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(s1, mut row)| {
            let xi1 = c[0] + g.xi(s1);
            for (s2, z) in row.iter_mut().enumerate() {
                *z *= sym.value([0.0, 0.0], [xi1, c[1] + g.xi(s2)]);
            }
            debug_assert_eq!(row.len(), n);
        });
        let out = semiclassical_ifft(&spec)?;
        crate::grid::check_finite(out.values.iter())?;
        return Ok(out);
    }
    if g.n > DIRECT_QUANTIZATION_MAX_N && !opts.allow_large {
        return Err(QmlError::CostGuard(format!(
            "x-dependent quantization on N = {} exceeds {DIRECT_QUANTIZATION_MAX_N}",
            g.n
        )));
    }
    let n = g.n;
    let c = u.carrier;
    // e^{i x eta / h} for grid x and lattice eta, shared by both axes.
    let phase = Array2::from_shape_fn((n, n), |(i, s)| Complex64::from_polar(1.0, g.x(i) * g.xi(s) / g.h));
    let scale = g.dxi() * g.dxi() / (2.0 * PI * g.h);
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x1 = g.x(i);
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let mut partial = vec![Complex64::new(0.0, 0.0); n];
            for (j, out) in row.iter_mut().enumerate() {
                let x2 = g.x(j);
                for (s1, p) in partial.iter_mut().enumerate() {
                    let xi1 = c[0] + g.xi(s1);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s2 in 0..n {
                        let v = sym.value([x1, x2], [xi1, c[1] + g.xi(s2)]);
                        acc += phase[[j, s2]] * spec.values[[s1, s2]] * v;
                    }
                    *p = acc * phase[[i, s1]];
                }
                *out = partial.iter().sum::<Complex64>() * scale;
            }
            row
        })
        .collect();
    let values = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
    Field2D::with_carrier(g, c, values)
}
