use super::jet::{Jet, Scalar};
use crate::error::{QmlError, Result};
use std::fmt;

/// Catalog of graph functions `a(x1, x2, xi2)` for symbols `xi1 - a`.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFn {
    /// `sqrt(1 - xi2^2)`
    CircleGraph,
    /// `xi2^2 / 2`
    Free,
    /// `x2 * xi2`
    Dilation,
    /// `sqrt(1 - xi2^2) + x2 * xi2^2 / 10`
    BentCircle,
    Zero,
    /// `c * xi2^(k+1)`
    Monomial { k: u32, c: f64 },
    /// `base + c * xi2^(k+1)`
    Perturbed { base: Box<GraphFn>, k: u32, c: f64 },
}

fn unit_sqrt<S: Scalar>(xi: &S) -> S {
    (xi.constant_like(1.0) - xi.clone() * xi.clone()).sqrt()
}

impl GraphFn {
    pub fn eval_generic<S: Scalar>(&self, x1: f64, x2: &S, xi: &S) -> S {
        match self {
            GraphFn::CircleGraph => unit_sqrt(xi),
            GraphFn::Free => (xi.clone() * xi.clone()).scale(0.5),
            GraphFn::Dilation => x2.clone() * xi.clone(),
            GraphFn::BentCircle => unit_sqrt(xi) + (x2.clone() * xi.clone() * xi.clone()).scale(0.1),
            GraphFn::Zero => xi.constant_like(0.0),
            GraphFn::Monomial { k, c } => xi.powi(k + 1).scale(*c),
            GraphFn::Perturbed { base, k, c } => base.eval_generic(x1, x2, xi) + xi.powi(k + 1).scale(*c),
        }
    }

    /// Open interval of `xi2` on which the formula is smooth.
    pub fn xi_domain(&self) -> (f64, f64) {
        match self {
            GraphFn::CircleGraph | GraphFn::BentCircle => (-1.0, 1.0),
            GraphFn::Perturbed { base, .. } => base.xi_domain(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn in_domain(&self, xi: f64) -> bool {
        let (lo, hi) = self.xi_domain();
        xi > lo && xi < hi
    }

    /// Value with the square root clamped at zero outside the domain.
    pub fn eval(&self, x1: f64, x2: f64, xi: f64) -> f64 {
        let (lo, hi) = self.xi_domain();
        if xi > lo && xi < hi {
            self.eval_generic(x1, &x2, &xi)
        } else {
            self.eval_generic(x1, &x2, &xi.clamp(-1.0, 1.0)) + self.eval_tail(x1, x2, xi)
        }
    }

    fn eval_tail(&self, x1: f64, x2: f64, xi: f64) -> f64 {
        // Polynomial parts are still evaluated at the true xi outside the root's domain.
        let c = xi.clamp(-1.0, 1.0);
        match self {
            GraphFn::BentCircle => 0.1 * x2 * (xi * xi - c * c),
            GraphFn::Perturbed { base, k, c: cc } => {
                base.eval_tail(x1, x2, xi) + cc * (xi.powi(*k as i32 + 1) - c.powi(*k as i32 + 1))
            }
            _ => 0.0,
        }
    }

    fn require_domain(&self, xi: f64) -> Result<()> {
        if self.in_domain(xi) {
            Ok(())
        } else {
            Err(QmlError::Domain(format!("{self} is not smooth at xi2 = {xi}")))
        }
    }

    /// `d^r a / d xi2^r` for `r = 0..=order`.
    pub fn xi_derivatives(&self, x1: f64, x2: f64, xi: f64, order: usize) -> Result<Vec<f64>> {
        self.require_domain(xi)?;
        let t = Jet::variable(xi, order);
        Ok(self.eval_generic(x1, &t.constant_like(x2), &t).derivatives())
    }

    /// `(a, d_x2 a, d_xi2 a)`.
    pub fn gradient(&self, x1: f64, x2: f64, xi: f64) -> Result<[f64; 3]> {
        self.require_domain(xi)?;
        let tx = Jet::variable(x2, 1);
        let dx = self.eval_generic(x1, &tx, &tx.constant_like(xi)).derivatives();
        let tk = Jet::variable(xi, 1);
        let dk = self.eval_generic(x1, &tk.constant_like(x2), &tk).derivatives();
        Ok([dx[0], dx[1], dk[1]])
    }

    /// `(a_x2x2, a_x2xi2, a_xi2xi2)`, the mixed entry by polarization along `(1, 1)`.
    pub fn hessian(&self, x1: f64, x2: f64, xi: f64) -> Result<[f64; 3]> {
        self.require_domain(xi)?;
        let second = |dir: (f64, f64)| {
            let t = Jet::variable(0.0, 2);
            let xx = t.scale(dir.0) + t.constant_like(x2);
            let kk = t.scale(dir.1) + t.constant_like(xi);
            self.eval_generic(x1, &xx, &kk).derivatives()[2]
        };
        let axx = second((1.0, 0.0));
        let akk = second((0.0, 1.0));
        let diag = second((1.0, 1.0));
        Ok([axx, 0.5 * (diag - axx - akk), akk])
    }

    pub fn is_x_dependent(&self) -> bool {
        match self {
            GraphFn::Dilation | GraphFn::BentCircle => true,
            GraphFn::Perturbed { base, .. } => base.is_x_dependent(),
            _ => false,
        }
    }
}

impl fmt::Display for GraphFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFn::CircleGraph => write!(f, "circle_graph"),
            GraphFn::Free => write!(f, "free"),
            GraphFn::Dilation => write!(f, "dilation"),
            GraphFn::BentCircle => write!(f, "bent_circle"),
            GraphFn::Zero => write!(f, "zero"),
            GraphFn::Monomial { k, c } => write!(f, "monomial(k={k}, c={c})"),
            GraphFn::Perturbed { base, k, c } => write!(f, "perturbed(base={base}, k={k}, c={c})"),
        }
    }
}
