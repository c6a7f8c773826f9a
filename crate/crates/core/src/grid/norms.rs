use super::{Field2D, GridSpec};
use crate::error::{QmlError, Result};
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

/// Per-row partial sums in parallel, combined sequentially in row order.
fn row_sums(values: &Array2<Complex64>, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let parts: Vec<f64> = values
        .axis_iter(Axis(0))
        .into_par_iter()
        .map(|row| row.iter().map(|z| f(z.norm())).sum())
        .collect();
    parts.iter().sum()
}

fn max_abs(values: &Array2<Complex64>) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn l2(grid: &GridSpec, values: &Array2<Complex64>) -> f64 {
    let dx = grid.dx();
    (row_sums(values, |a| a * a) * dx * dx).sqrt()
}

/// Riemann-sum `L^p` norm; `p = f64::INFINITY` gives the maximum modulus.
pub fn lp_norm(u: &Field2D, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(QmlError::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let m = max_abs(&u.values);
    if p.is_infinite() || m == 0.0 {
        return Ok(m);
    }
    if p == 2.0 {
        return Ok(u.l2_norm());
    }
    let dx = u.grid.dx();
    let s = row_sums(&u.values, |a| (a / m).powf(p));
    Ok(m * (s * dx * dx).powf(1.0 / p))
}

/// Closed axis-aligned rectangle `[x1.0, x1.1] x [x2.0, x2.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedNorm {
    pub value: f64,
    pub samples: usize,
    pub warning: Option<String>,
}

/// `L^2` norm over the grid samples contained in `rect`.
pub fn restrict_norm(u: &Field2D, rect: &Rect) -> Result<RestrictedNorm> {
    let g = &u.grid;
    let l = g.half_width;
    let inside = |(a, b): (f64, f64)| a <= b && a >= -l && b <= l;
    if !(inside(rect.x1) && inside(rect.x2)) {
        return Err(QmlError::Domain(format!("rectangle {rect:?} is not inside the box")));
    }
    let idx = |(a, b): (f64, f64)| (0..g.n).filter(move |&i| g.x(i) >= a && g.x(i) <= b);
    let rows: Vec<usize> = idx(rect.x1).collect();
    let cols: Vec<usize> = idx(rect.x2).collect();
    let samples = rows.len() * cols.len();
    if samples == 0 {
        return Ok(RestrictedNorm { value: 0.0, samples, warning: Some("rectangle contains no grid samples".into()) });
    }
    let parts: Vec<f64> = rows
        .par_iter()
        .map(|&i| cols.iter().map(|&j| u.values[[i, j]].norm_sqr()).sum())
        .collect();
    let dx = g.dx();
    Ok(RestrictedNorm { value: (parts.iter().sum::<f64>() * dx * dx).sqrt(), samples, warning: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    /// Fixed x1 row, varying x2.
    Row,
    /// Fixed x2 column, varying x1.
    Column,
}

/// Two-column CSV `x,abs_u` of a grid line.
pub fn slice_csv(u: &Field2D, axis: SliceAxis, index: usize) -> Result<String> {
    let g = &u.grid;
    if index >= g.n {
        return Err(QmlError::Shape(format!("slice index {index} out of range")));
    }
    let mut out = String::from("x,abs_u\n");
    for k in 0..g.n {
        let z = match axis {
            SliceAxis::Row => u.values[[index, k]],
            SliceAxis::Column => u.values[[k, index]],
        };
        out.push_str(&format!("{},{}\n", g.x(k), z.norm()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn field_from(g: GridSpec, data: &[(f64, f64)]) -> Field2D {
        let values = Array2::from_shape_fn((g.n, g.n), |(i, j)| {
            let (a, b) = data[(i * g.n + j) % data.len()];
            Complex64::new(a, b)
        });
        Field2D::new(g, values).unwrap()
    }

    #[test]
    fn constant_field_norms() {
        for &n in &[16usize, 32, 50] {
            let g = GridSpec::new(1.0, n, 0.5).unwrap();
            let u = Field2D::from_fn(g, |_, _| Complex64::new(1.0, 0.0)).unwrap();
            for &p in &[1.0, 2.0, 3.0, 7.5] {
                assert!((lp_norm(&u, p).unwrap() - 4f64.powf(1.0 / p)).abs() < 1e-12);
            }
            assert_eq!(lp_norm(&u, f64::INFINITY).unwrap(), 1.0);
        }
    }

    #[test]
    fn zero_field_norms() {
        let u = Field2D::zeros(GridSpec::new(2.0, 16, 0.5).unwrap());
        for &p in &[1.0, 2.0, 6.0, f64::INFINITY] {
            assert_eq!(lp_norm(&u, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_small_p() {
        let u = Field2D::zeros(GridSpec::new(2.0, 16, 0.5).unwrap());
        assert!(lp_norm(&u, 0.5).is_err());
        assert!(lp_norm(&u, f64::NAN).is_err());
    }

    #[test]
    fn restriction_edge_cases() {
        let g = GridSpec::new(2.0, 32, 0.5).unwrap();
        let u = Field2D::from_fn(g, |x1, x2| Complex64::new((-(x1 * x1 + x2 * x2)).exp(), 0.0)).unwrap();
        let full = restrict_norm(&u, &Rect { x1: (-2.0, 2.0), x2: (-2.0, 2.0) }).unwrap();
        assert!((full.value - lp_norm(&u, 2.0).unwrap()).abs() < 1e-14);
        let thin = restrict_norm(&u, &Rect { x1: (0.01, 0.01), x2: (-1.0, 1.0) }).unwrap();
        assert_eq!(thin.value, 0.0);
        assert!(thin.warning.is_some());
        assert!(restrict_norm(&u, &Rect { x1: (-3.0, 0.0), x2: (0.0, 1.0) }).is_err());
    }

    #[test]
    fn half_box_of_even_field() {
        // Even about the midpoint between sample rows N/2 - 1 and N/2.
        let g = GridSpec::new(2.0, 32, 0.5).unwrap();
        let mid = 0.5 * (g.x(15) + g.x(16));
        let u = Field2D::from_fn(g, |x1, x2| Complex64::new((-(x1 - mid).powi(2) - x2 * x2).exp(), 0.3)).unwrap();
        let left = restrict_norm(&u, &Rect { x1: (-2.0, mid), x2: (-2.0, 2.0) }).unwrap();
        let total = u.l2_norm();
        let mut direct = 0.0;
        for i in 0..16 {
            for j in 0..32 {
                direct += u.values[[i, j]].norm_sqr() * g.dx() * g.dx();
            }
        }
        assert!((left.value.powi(2) - direct).abs() < 1e-14);
        assert!((left.value.powi(2) - 0.5 * total * total).abs() < 1e-12);
    }

    #[test]
    fn slice_export() {
        let g = GridSpec::new(1.0, 16, 0.5).unwrap();
        let u = Field2D::from_fn(g, |x1, _| Complex64::new(x1, 0.0)).unwrap();
        let csv = slice_csv(&u, SliceAxis::Column, 3).unwrap();
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.starts_with("x,abs_u\n-1,1\n"));
        assert!(slice_csv(&u, SliceAxis::Row, 16).is_err());
    }

    proptest! {
        #[test]
        fn holder_interpolation(data in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
            let g = GridSpec::new(1.5, 16, 0.5).unwrap();
            let u = field_from(g, &data);
            let l2 = lp_norm(&u, 2.0).unwrap();
            let bound = lp_norm(&u, f64::INFINITY).unwrap() * lp_norm(&u, 1.0).unwrap();
            prop_assert!(l2 * l2 <= bound * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn nested_rectangles(data in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64),
                             a in -1.5f64..0.0, b in 0.0f64..1.5, shrink in 0.0f64..1.0) {
            let g = GridSpec::new(1.5, 16, 0.5).unwrap();
            let u = field_from(g, &data);
            let outer = Rect { x1: (a, b), x2: (a, b) };
            let inner = Rect { x1: (a + shrink * (b - a) / 2.0, b), x2: (a, b - shrink * (b - a) / 2.0) };
            let ro = restrict_norm(&u, &outer).unwrap().value;
            let ri = restrict_norm(&u, &inner).unwrap().value;
            prop_assert!(ri <= ro);
        }

        #[test]
        fn thread_count_does_not_change_norms(data in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64), p in 1.0f64..12.0) {
            let g = GridSpec::new(1.5, 32, 0.5).unwrap();
            let u = field_from(g, &data);
            let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
            let a = one.install(|| lp_norm(&u, p).unwrap());
            let b = four.install(|| lp_norm(&u, p).unwrap());
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
