use super::{check_finite, Field2D, SpectralField2D};
use crate::error::Result;
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub(crate) fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft(n, dir)
}

fn transform_rows(a: &mut Array2<Complex64>, fft: &Arc<dyn Fft<f64>>) {
    a.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut row| {
        let buf = row.as_slice_mut().expect("standard layout rows");
        fft.process(buf);
    });
}

/// Unnormalized 2-D DFT in place (rows then columns).
pub(crate) fn dft2(a: &mut Array2<Complex64>, dir: FftDirection) {
    let n = a.nrows();
    let fft = plan(n, dir);
    transform_rows(a, &fft);
    let mut t = a.t().as_standard_layout().into_owned();
    let fft = plan(t.nrows(), dir);
    transform_rows(&mut t, &fft);
    a.assign(&t.t());
}

/// Discrete semiclassical Fourier transform on the centred lattice.
///
/// `U[s1, s2] = dx^2 / (2 pi h) * (-1)^(s1 + s2) * DFT(u)[(s + N/2) mod N]`.
pub fn semiclassical_fft(u: &Field2D) -> Result<SpectralField2D> {
    let g = u.grid;
    g.validate()?;
    check_finite(u.values.iter())?;
    let n = g.n;
    let mut a = u.values.as_standard_layout().into_owned();
    dft2(&mut a, FftDirection::Forward);
    let scale = g.dx() * g.dx() / (2.0 * PI * g.h);
    let half = n / 2;
    let values = Array2::from_shape_fn((n, n), |(s1, s2)| {
        let z = a[[(s1 + half) % n, (s2 + half) % n]] * scale;
        if (s1 + s2) % 2 == 0 {
            z
        } else {
            -z
        }
    });
    let mut warnings = Vec::new();
    if !g.resolves_unit_band() {
        warnings.push(format!(
            "frequency lattice half-width {:.4} does not cover [-2, 2]",
            g.nyquist()
        ));
    }
    Ok(SpectralField2D { grid: g, carrier: u.carrier, values, warnings })
}

pub fn semiclassical_ifft(spec: &SpectralField2D) -> Result<Field2D> {
    let g = spec.grid;
    g.validate()?;
    check_finite(spec.values.iter())?;
    let n = g.n;
    let half = n / 2;
    let scale = 2.0 * PI * g.h / (g.dx() * g.dx()) / (n * n) as f64;
    let mut a = Array2::from_shape_fn((n, n), |(k1, k2)| {
        let (s1, s2) = ((k1 + half) % n, (k2 + half) % n);
        let z = spec.values[[s1, s2]] * scale;
        if (s1 + s2) % 2 == 0 {
            z
        } else {
            -z
        }
    });
    dft2(&mut a, FftDirection::Inverse);
    Ok(Field2D { grid: g, carrier: spec.carrier, values: a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn direct_transform(u: &Field2D) -> Array2<Complex64> {
        let g = u.grid;
        let n = g.n;
        let mut out = Array2::zeros((n, n));
        for s1 in 0..n {
            for s2 in 0..n {
                let (k1, k2) = (g.xi(s1), g.xi(s2));
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let ph = -(g.x(i) * k1 + g.x(j) * k2) / g.h;
                        acc += u.values[[i, j]] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[[s1, s2]] = acc * g.dx() * g.dx() / (2.0 * PI * g.h);
            }
        }
        out
    }

    fn pseudo_random_field(g: GridSpec, seed: u64) -> Field2D {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let values = Array2::from_shape_fn((g.n, g.n), |_| Complex64::new(next(), next()));
        Field2D::new(g, values).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = GridSpec::new(8.0, 32, 0.25).unwrap();
        let s = semiclassical_fft(&Field2D::zeros(g)).unwrap();
        assert!(s.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let back = semiclassical_ifft(&s).unwrap();
        assert!(back.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn matches_direct_dft_on_plane_wave() {
        let g = GridSpec::new(2.0, 32, 0.3).unwrap();
        let (s1, s2) = (19usize, 9usize);
        let (k1, k2) = (g.xi(s1), g.xi(s2));
        let u = Field2D::from_fn(g, |x1, x2| Complex64::from_polar(1.0, (x1 * k1 + x2 * k2) / g.h)).unwrap();
        let fast = semiclassical_fft(&u).unwrap();
        let slow = direct_transform(&u);
        let spike = (2.0 * g.half_width).powi(2) / (2.0 * PI * g.h);
        for a in 0..32 {
            for b in 0..32 {
                assert!((fast.values[[a, b]] - slow[[a, b]]).norm() < 1e-9 * spike);
            }
        }
        assert!((fast.values[[s1, s2]].re - spike).abs() < 1e-9 * spike);
        let off: f64 = fast.values.iter().map(|z| z.norm()).sum::<f64>() - fast.values[[s1, s2]].norm();
        assert!(off < 1e-9 * spike);
    }

    #[test]
    fn matches_direct_dft_on_random_field() {
        let g = GridSpec::new(1.5, 16, 0.7).unwrap();
        let u = pseudo_random_field(g, 3);
        let fast = semiclassical_fft(&u).unwrap();
        let slow = direct_transform(&u);
        let err: f64 = (&fast.values - &slow).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn spike_inverts_to_plane_wave() {
        let g = GridSpec::new(2.0, 32, 0.3).unwrap();
        let mut spec = Array2::zeros((32, 32));
        spec[[5, 22]] = Complex64::new(1.0, 0.0);
        let s = SpectralField2D::new(g, [0.0, 0.0], spec).unwrap();
        let u = semiclassical_ifft(&s).unwrap();
        let amp = g.dxi() * g.dxi() / (2.0 * PI * g.h);
        for i in 0..32 {
            for j in 0..32 {
                let ph = (g.x(i) * g.xi(5) + g.x(j) * g.xi(22)) / g.h;
                let want = Complex64::from_polar(amp, ph);
                assert!((u.values[[i, j]] - want).norm() < 1e-12 * amp);
            }
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let h = 1.0 / 32.0;
        let g = GridSpec::new(8.0, 256, h).unwrap();
        let u = Field2D::from_fn(g, |x1, x2| Complex64::new((-(x1 * x1 + x2 * x2) / (2.0 * h)).exp(), 0.0)).unwrap();
        let s = semiclassical_fft(&u).unwrap();
        assert!(!s.warnings.is_empty());
        let mut num = 0.0;
        let mut den = 0.0;
        for s1 in 0..256 {
            for s2 in 0..256 {
                let (a, b) = (g.xi(s1), g.xi(s2));
                let want = (-(a * a + b * b) / (2.0 * h)).exp();
                num += (s.values[[s1, s2]] - want).norm_sqr();
                den += want * want;
            }
        }
        assert!((num / den).sqrt() < 1e-6);
    }

    #[test]
    fn round_trip_and_plancherel() {
        for &n in &[64usize, 128, 256] {
            let g = GridSpec::new(3.0, n, 0.1).unwrap();
            let u = pseudo_random_field(g, n as u64);
            let s = semiclassical_fft(&u).unwrap();
            assert!((s.l2_norm() - u.l2_norm()).abs() / u.l2_norm() < 1e-10);
            let back = semiclassical_ifft(&s).unwrap();
            assert!(back.sub(&u).unwrap().l2_norm() / u.l2_norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = GridSpec::new(1.0, 16, 0.5).unwrap();
        let mut u = Field2D::zeros(g);
        u.values[[0, 1]] = Complex64::new(f64::INFINITY, 0.0);
        assert!(semiclassical_fft(&u).is_err());
    }
}
