//! Truncated Taylor arithmetic for exact higher derivatives of catalog symbols.

use std::ops::{Add, Mul, Neg, Sub};

/// Scalars the catalog formulas are generic over.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant_like(&self, v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: u32) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl Scalar for f64 {
    fn constant_like(&self, v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

/// Taylor coefficients `c[i] = f^(i)(t0) / i!` truncated at a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn variable(t0: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = t0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn constant(v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// Derivatives `f^(r)(t0)` for `r = 0..=order`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(r, &v)| {
                if r > 0 {
                    fact *= r as f64;
                }
                v * fact
            })
            .collect()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { c: self.c.iter().map(|a| -a).collect() }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for (i, ci) in c.iter_mut().enumerate() {
            for j in 0..=i {
                *ci += self.c[j] * o.c[i - j];
            }
        }
        Jet { c }
    }
}

impl Scalar for Jet {
    fn constant_like(&self, v: f64) -> Self {
        Jet::constant(v, self.order())
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn sqrt(&self) -> Self {
        let n = self.c.len();
        let mut g = vec![0.0; n];
        g[0] = self.c[0].sqrt();
        for k in 1..n {
            let mut s = self.c[k];
            for i in 1..k {
                s -= g[i] * g[k - i];
            }
            g[k] = s / (2.0 * g[0]);
        }
        Jet { c: g }
    }
    fn powi(&self, n: u32) -> Self {
        let mut out = self.constant_like(1.0);
        for _ in 0..n {
            out = out * self.clone();
        }
        out
    }
    fn scale(&self, s: f64) -> Self {
        Jet { c: self.c.iter().map(|a| a * s).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let t = Jet::variable(2.0, 4);
        let p = t.powi(3).scale(5.0) - t.clone() * t.constant_like(7.0);
        let d = p.derivatives();
        assert_eq!(d, vec![5.0 * 8.0 - 14.0, 60.0 - 7.0, 60.0, 30.0, 0.0]);
    }

    #[test]
    fn sqrt_recurrence_matches_closed_form() {
        // d^r/dt^r sqrt(1 - t^2) at t = 0.3
        let t = Jet::variable(0.3, 3);
        let g = (t.constant_like(1.0) - t.clone() * t.clone()).sqrt();
        let d = g.derivatives();
        let s = (1.0f64 - 0.09).sqrt();
        assert!((d[0] - s).abs() < 1e-15);
        assert!((d[1] + 0.3 / s).abs() < 1e-14);
        assert!((d[2] + 1.0 / s.powi(3)).abs() < 1e-13);
        assert!((d[3] + 3.0 * 0.3 / s.powi(5)).abs() < 1e-12);
    }
}
