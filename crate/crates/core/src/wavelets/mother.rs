use crate::error::{QmlError, Result};
use crate::grid::fft::plan;
use num_complex::Complex64;
use rustfft::FftDirection;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type RealFn = dyn Fn(f64) -> f64 + Send + Sync;
pub type ComplexFn = dyn Fn(f64) -> Complex64 + Send + Sync;

/// Compactly supported zero-mean mother wavelet on `[-support, support]`.
#[derive(Clone)]
pub struct WaveletSpec {
    pub name: String,
    pub support: f64,
    f: Arc<RealFn>,
    /// Antiderivative with `f = i g'`, vanishing at both ends of the support.
    g: Option<Arc<ComplexFn>>,
}

impl fmt::Debug for WaveletSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveletSpec").field("name", &self.name).field("support", &self.support).finish()
    }
}

/// `int_{-1}^{1} t^2 (1 - t^2)^6 dt = B(3/2, 7) = 92160 / 2027025`.
const POLY_BUMP_NORM_SQ: f64 = 92160.0 / 2027025.0;

const MEAN_SAMPLES: usize = 4096;

impl WaveletSpec {
    /// `f(t) = c t (1 - t^2)^3` on `[-1, 1]` with `c` making `||f||_2 = 1`.
    pub fn poly_bump() -> Self {
        let c = 1.0 / POLY_BUMP_NORM_SQ.sqrt();
        let f = move |t: f64| if t.abs() < 1.0 { c * t * (1.0 - t * t).powi(3) } else { 0.0 };
        let g = move |t: f64| {
            if t.abs() < 1.0 {
                Complex64::new(0.0, c * (1.0 - t * t).powi(4) / 8.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        WaveletSpec { name: "poly_bump".into(), support: 1.0, f: Arc::new(f), g: Some(Arc::new(g)) }
    }

    pub fn custom(name: &str, support: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(support.is_finite() && support > 0.0) {
            return Err(QmlError::Domain(format!("wavelet support must be positive, got {support}")));
        }
        let w = WaveletSpec { name: name.into(), support, f: Arc::new(f), g: None };
        w.check_mean()?;
        Ok(w)
    }

    /// `f(t / s) / sqrt(s)`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(QmlError::Domain(format!("dilation must be positive, got {s}")));
        }
        let (f, g) = (self.f.clone(), self.g.clone());
        let r = s.sqrt();
        Ok(WaveletSpec {
            name: format!("{}@{s}", self.name),
            support: self.support * s,
            f: Arc::new(move |t| f(t / s) / r),
            g: g.map(|g| Arc::new(move |t: f64| g(t / s) * r) as Arc<ComplexFn>),
        })
    }

    pub fn f(&self, t: f64) -> f64 {
        if t.abs() >= self.support {
            0.0
        } else {
            (self.f)(t)
        }
    }

    pub fn g(&self, t: f64) -> Option<Complex64> {
        self.g.as_ref().map(|g| if t.abs() >= self.support { Complex64::new(0.0, 0.0) } else { g(t) })
    }

    /// Midpoint quadrature of `int f`, relative to `int |f|`.
    pub fn mean(&self) -> f64 {
        let dt = 2.0 * self.support / MEAN_SAMPLES as f64;
        let (mut s, mut a) = (0.0, 0.0);
        for i in 0..MEAN_SAMPLES {
            let v = self.f(-self.support + (i as f64 + 0.5) * dt);
            s += v;
            a += v.abs();
        }
        if a == 0.0 {
            0.0
        } else {
            s / a
        }
    }

    fn check_mean(&self) -> Result<()> {
        let m = self.mean();
        if m.abs() > 1e-12 {
            return Err(QmlError::Domain(format!("mother wavelet has nonzero mean (relative {m:.3e})")));
        }
        Ok(())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let dt = 2.0 * self.support / MEAN_SAMPLES as f64;
        (0..MEAN_SAMPLES).map(|i| self.f(-self.support + (i as f64 + 0.5) * dt).powi(2)).sum::<f64>() * dt
    }
}

/// `C_f = int |f^(xi)|^2 / |xi| dxi` with `f^(xi) = int f(t) e^{-i t xi} dt`.
pub fn admissibility_constant(w: &WaveletSpec) -> Result<f64> {
    admissibility_constant_with(w, 1024, 128)
}

/// Samples `f` at `samples_per_support` points per support half-width, zero-padded to
/// `pad * support`, and applies the trapezoid rule on the FFT frequencies.
pub fn admissibility_constant_with(w: &WaveletSpec, samples_per_support: usize, pad: usize) -> Result<f64> {
    w.check_mean()?;
    let dt = w.support / samples_per_support as f64;
    let n = (pad * samples_per_support).next_power_of_two();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|i| {
            // Wrapped ordering: t = i dt for the first half, negative times at the end.
            let t = if i < n / 2 { i as f64 * dt } else { (i as f64 - n as f64) * dt };
            Complex64::new(w.f(t), 0.0)
        })
        .collect();
    plan(n, FftDirection::Forward).process(&mut buf);
    let dxi = 2.0 * PI / (n as f64 * dt);
    // |f^|^2 / xi is odd and smooth through 0, so the one-sided trapezoid rule carries an
    // O(dxi^2) end correction; one Richardson step removes it.
    let integrand: Vec<f64> =
        (0..=n / 2).map(|m| if m == 0 { 0.0 } else { buf[m].norm_sqr() * dt * dt / (m as f64 * dxi) }).collect();
    let trap = |stride: usize| -> f64 {
        let last = (n / 2 / stride) * stride;
        let inner: f64 = (stride..last).step_by(stride).map(|m| integrand[m]).sum();
        2.0 * stride as f64 * dxi * (inner + 0.5 * integrand[last])
    };
    let total = (4.0 * trap(1) - trap(2)) / 3.0;
    let c = total;
    if !(c.is_finite() && c > 0.0) {
        return Err(QmlError::Domain("admissibility constant is not positive".into()));
    }
    Ok(c)
}
