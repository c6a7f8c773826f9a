use crate::symbols::jet::Scalar;
use std::ops::{Add, Mul, Neg, Sub};

/// Second-order Taylor data in two variables `(x2, xi2)`:
/// `[f, f_x, f_k, f_xx, f_xk, f_kk]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual2(pub [f64; 6]);

impl Dual2 {
    pub fn x(x: f64) -> Self {
        Dual2([x, 1.0, 0.0, 0.0, 0.0, 0.0])
    }

    pub fn k(k: f64) -> Self {
        Dual2([k, 0.0, 1.0, 0.0, 0.0, 0.0])
    }

    fn c(v: f64) -> Self {
        Dual2([v, 0.0, 0.0, 0.0, 0.0, 0.0])
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        let mut r = self.0;
        for (a, b) in r.iter_mut().zip(o.0) {
            *a += b;
        }
        Dual2(r)
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        self + (-o)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        Dual2(self.0.map(|v| -v))
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        let [f, fx, fk, fxx, fxk, fkk] = self.0;
        let [g, gx, gk, gxx, gxk, gkk] = o.0;
        Dual2([
            f * g,
            fx * g + f * gx,
            fk * g + f * gk,
            fxx * g + 2.0 * fx * gx + f * gxx,
            fxk * g + fx * gk + fk * gx + f * gxk,
            fkk * g + 2.0 * fk * gk + f * gkk,
        ])
    }
}

impl Scalar for Dual2 {
    fn constant_like(&self, v: f64) -> Self {
        Dual2::c(v)
    }
    fn value(&self) -> f64 {
        self.0[0]
    }
    fn sqrt(&self) -> Self {
        let [f, fx, fk, fxx, fxk, fkk] = self.0;
        let s = f.sqrt();
        let (d1, d2) = (0.5 / s, -0.25 / (s * s * s));
        Dual2([s, d1 * fx, d1 * fk, d1 * fxx + d2 * fx * fx, d1 * fxk + d2 * fx * fk, d1 * fkk + d2 * fk * fk])
    }
    fn powi(&self, n: u32) -> Self {
        let mut acc = Dual2::c(1.0);
        let mut base = *self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    fn scale(&self, s: f64) -> Self {
        Dual2(self.0.map(|v| v * s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::GraphFn;

    #[test]
    fn matches_catalog_derivatives() {
        for g in [GraphFn::BentCircle, GraphFn::Dilation, GraphFn::Perturbed { base: Box::new(GraphFn::BentCircle), k: 2, c: 0.7 }] {
            let (x2, k) = (0.37, -0.41);
            let d = g.eval_generic(0.0, &Dual2::x(x2), &Dual2::k(k));
            let grad = g.gradient(0.0, x2, k).unwrap();
            let hess = g.hessian(0.0, x2, k).unwrap();
            let want = [grad[0], grad[1], grad[2], hess[0], hess[1], hess[2]];
            for (a, b) in d.0.iter().zip(want) {
                assert!((a - b).abs() < 1e-13 * (1.0 + b.abs()), "{g}: {a} {b}");
            }
        }
    }
}
