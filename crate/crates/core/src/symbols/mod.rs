//! Symbol families `p(x, xi)`, characteristic graphs, contact order and left
//! quantization on a grid.

mod catalog;
mod contact;
mod expr;
pub mod jet;
mod quantize;

pub use catalog::GraphFn;
pub use contact::{contact_order, contact_order_at, ContactMethod, ContactOrder, ContactReport};
pub use expr::{parse_call, parse_graph_fn, parse_symbol_expr, Arg, Call};
pub use quantize::{apply_left_quantization, apply_left_quantization_with, QuantizeOptions};

use crate::error::{QmlError, Result};
use std::fmt;
use std::sync::Arc;

pub type SymbolFn = dyn Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync;

/// User-supplied symbol. `x_dependent = false` lets quantization use the FFT path.
#[derive(Clone)]
pub struct CustomSymbol {
    pub name: String,
    pub x_dependent: bool,
    pub f: Arc<SymbolFn>,
    /// Starting value of `xi1` for the Newton solve in [`graph_of`].
    pub branch_hint: f64,
}

impl fmt::Debug for CustomSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum SymbolSpec {
    /// `|xi|^2 - 1`
    CircleMinusOne,
    /// `xi1 - a(x, xi2)`
    GraphSymbol(GraphFn),
    /// `xi1 - sqrt(1 - xi2^2) - c xi2^(k+1)`
    ContactPerturbedCircle { k: u32, c: f64 },
    /// `xi1 - c xi2^(k+1)`
    FlatContact { k: u32, c: f64 },
    Custom(CustomSymbol),
}

impl SymbolSpec {
    pub fn contact_circle(k: u32, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(QmlError::Domain("contact coefficient must be finite and nonzero".into()));
        }
        Ok(SymbolSpec::ContactPerturbedCircle { k, c })
    }

    pub fn flat_contact(k: u32, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(QmlError::Domain("contact coefficient must be finite and nonzero".into()));
        }
        Ok(SymbolSpec::FlatContact { k, c })
    }

    pub fn custom(
        name: &str,
        x_dependent: bool,
        f: impl Fn([f64; 2], [f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SymbolSpec::Custom(CustomSymbol { name: name.to_string(), x_dependent, f: Arc::new(f), branch_hint: 0.0 })
    }

    /// The symbol of `h D_{x1}`.
    pub fn xi1() -> Self {
        Self::custom("xi1", false, |_, xi| xi[0])
    }

    /// The symbol of `h^n D_{x2}^n`.
    pub fn xi2_power(n: u32) -> Self {
        Self::custom(&format!("xi2_power(n={n})"), false, move |_, xi| xi[1].powi(n as i32))
    }

    /// The symbol `x1` (multiplication operator).
    pub fn x1() -> Self {
        Self::custom("x1", true, |x, _| x[0])
    }

    pub fn value(&self, x: [f64; 2], xi: [f64; 2]) -> f64 {
        match self {
            SymbolSpec::CircleMinusOne => xi[0] * xi[0] + xi[1] * xi[1] - 1.0,
            SymbolSpec::GraphSymbol(a) => xi[0] - a.eval(x[0], x[1], xi[1]),
            SymbolSpec::ContactPerturbedCircle { k, c } => {
                xi[0] - (1.0 - xi[1] * xi[1]).max(0.0).sqrt() - c * xi[1].powi(*k as i32 + 1)
            }
            SymbolSpec::FlatContact { k, c } => xi[0] - c * xi[1].powi(*k as i32 + 1),
            SymbolSpec::Custom(s) => (s.f)(x, xi),
        }
    }

    pub fn is_x_dependent(&self) -> bool {
        match self {
            SymbolSpec::GraphSymbol(a) => a.is_x_dependent(),
            SymbolSpec::Custom(s) => s.x_dependent,
            _ => false,
        }
    }

    /// `(d_xi1 p, d_xi2 p)`; closed form for the built-in families.
    pub fn xi_gradient(&self, x: [f64; 2], xi: [f64; 2]) -> Result<[f64; 2]> {
        match self {
            SymbolSpec::CircleMinusOne => Ok([2.0 * xi[0], 2.0 * xi[1]]),
            SymbolSpec::Custom(s) => {
                let d = |i: usize| {
                    let e = 1e-6 * (1.0 + xi[i].abs());
                    let mut p = xi;
                    let mut m = xi;
                    p[i] += e;
                    m[i] -= e;
                    ((s.f)(x, p) - (s.f)(x, m)) / (2.0 * e)
                };
                Ok([d(0), d(1)])
            }
            _ => {
                let g = self.graph_fn().expect("graph family");
                Ok([1.0, -g.gradient(x[0], x[1], xi[1])?[2]])
            }
        }
    }

    /// `d^r p / d xi2^r`, `r = 0..=order`, at fixed `xi1`.
    pub fn xi2_derivatives(&self, x: [f64; 2], xi: [f64; 2], order: usize) -> Result<Vec<f64>> {
        match self {
            SymbolSpec::CircleMinusOne => {
                let mut d = vec![0.0; order + 1];
                d[0] = self.value(x, xi);
                if order >= 1 {
                    d[1] = 2.0 * xi[1];
                }
                if order >= 2 {
                    d[2] = 2.0;
                }
                Ok(d)
            }
            SymbolSpec::Custom(_) => Err(QmlError::Domain("custom symbols have no closed-form derivatives".into())),
            _ => {
                let g = self.graph_fn().expect("graph family");
                let mut d: Vec<f64> = g.xi_derivatives(x[0], x[1], xi[1], order)?.iter().map(|v| -v).collect();
                d[0] += xi[0];
                Ok(d)
            }
        }
    }

    /// Graph function `a` when the symbol is `xi1 - a` in closed form.
    pub fn graph_fn(&self) -> Option<GraphFn> {
        match self {
            SymbolSpec::GraphSymbol(a) => Some(a.clone()),
            SymbolSpec::ContactPerturbedCircle { k, c } => {
                Some(GraphFn::Perturbed { base: Box::new(GraphFn::CircleGraph), k: *k, c: *c })
            }
            SymbolSpec::FlatContact { k, c } => Some(GraphFn::Monomial { k: *k, c: *c }),
            SymbolSpec::CircleMinusOne => Some(GraphFn::CircleGraph),
            SymbolSpec::Custom(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SymbolSpec::CircleMinusOne => "circle_minus_one".into(),
            SymbolSpec::GraphSymbol(a) => format!("graph(a={a})"),
            SymbolSpec::ContactPerturbedCircle { k, c } => format!("contact_circle(k={k}, c={c})"),
            SymbolSpec::FlatContact { k, c } => format!("flat_contact(k={k}, c={c})"),
            SymbolSpec::Custom(s) => s.name.clone(),
        }
    }
}

/// The branch `xi1 = g(xi2)` of `{p(x, .) = 0}` at a fixed base point.
#[derive(Debug, Clone)]
pub struct Graph {
    pub x: [f64; 2],
    kind: GraphKind,
}

#[derive(Debug, Clone)]
enum GraphKind {
    Closed(GraphFn),
    Newton(CustomSymbol),
}

pub const NEWTON_TOL: f64 = 1e-12;

impl Graph {
    pub fn eval(&self, xi2: f64) -> Result<f64> {
        match &self.kind {
            GraphKind::Closed(a) => {
                if !a.in_domain(xi2) {
                    return Err(QmlError::Domain(format!("no real branch of {a} at xi2 = {xi2}")));
                }
                Ok(a.eval(self.x[0], self.x[1], xi2))
            }
            GraphKind::Newton(s) => newton_branch(s, self.x, xi2),
        }
    }

    /// Closed-form derivatives `g^(r)(xi2)`, `r = 0..=order`, when available.
    pub fn closed_derivatives(&self, xi2: f64, order: usize) -> Option<Result<Vec<f64>>> {
        match &self.kind {
            GraphKind::Closed(a) => Some(a.xi_derivatives(self.x[0], self.x[1], xi2, order)),
            GraphKind::Newton(_) => None,
        }
    }
}

fn newton_branch(s: &CustomSymbol, x: [f64; 2], xi2: f64) -> Result<f64> {
    let p = |t: f64| (s.f)(x, [t, xi2]);
    let mut t = s.branch_hint;
    for _ in 0..100 {
        let v = p(t);
        if !v.is_finite() {
            break;
        }
        let e = 1e-7 * (1.0 + t.abs());
        let d = (p(t + e) - p(t - e)) / (2.0 * e);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = v / d;
        t -= step;
        if step.abs() <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    let r = p(t);
    if r.is_finite() && r.abs() <= NEWTON_TOL {
        Ok(t)
    } else {
        Err(QmlError::Domain(format!("no real solution of {} = 0 near xi2 = {xi2}", s.name)))
    }
}

/// Solve `p(x, xi) = 0` for `xi1` as a function of `xi2`.
pub fn graph_of(sym: &SymbolSpec, x: [f64; 2]) -> Result<Graph> {
    let kind = match sym {
        SymbolSpec::Custom(s) => GraphKind::Newton(s.clone()),
        other => GraphKind::Closed(other.graph_fn().expect("closed families have graphs")),
    };
    Ok(Graph { x, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_values() {
        let xi = [0.9, 0.3];
        assert_eq!(SymbolSpec::CircleMinusOne.value([0.0; 2], xi), 0.81 + 0.09 - 1.0);
        let p = SymbolSpec::contact_circle(2, 1.0).unwrap();
        let want = 0.9 - (1.0f64 - 0.09).sqrt() - 0.027;
        assert!((p.value([0.0; 2], xi) - want).abs() < 1e-15);
        let f = SymbolSpec::flat_contact(1, 2.0).unwrap();
        assert!((f.value([0.0; 2], xi) - (0.9 - 0.18)).abs() < 1e-15);
        assert!(SymbolSpec::contact_circle(1, 0.0).is_err());
        assert!(SymbolSpec::flat_contact(1, f64::NAN).is_err());
    }

    #[test]
    fn circle_graph_closed_form() {
        let g = graph_of(&SymbolSpec::CircleMinusOne, [0.0, 0.0]).unwrap();
        for &t in &[0.0, 0.3, -0.7] {
            assert_eq!(g.eval(t).unwrap(), (1.0f64 - t * t).sqrt());
        }
        assert!(g.eval(1.2).is_err());
    }

    #[test]
    fn flat_graph_closed_form() {
        let g = graph_of(&SymbolSpec::flat_contact(2, 0.5).unwrap(), [0.0, 0.0]).unwrap();
        assert_eq!(g.eval(2.0).unwrap(), 0.5 * 8.0);
    }

    fn bisection(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) < 0.0) == (f(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn newton_branch_matches_bisection() {
        let p = SymbolSpec::custom("cubic", false, |_, xi| xi[0].powi(3) + xi[0] - xi[1]);
        let g = graph_of(&p, [0.0, 0.0]).unwrap();
        for &t in &[-3.0, -0.5, 0.0, 0.2, 1.0, 7.5] {
            let n = g.eval(t).unwrap();
            let b = bisection(|s| s.powi(3) + s - t, -10.0, 10.0);
            assert!((n.powi(3) + n - t).abs() <= NEWTON_TOL);
            assert!((n - b).abs() < 1e-12, "{n} {b}");
        }
    }

    #[test]
    fn newton_reports_missing_branch() {
        let p = SymbolSpec::custom("no_root", false, |_, xi| xi[0] * xi[0] + 1.0 + xi[1] * xi[1]);
        let g = graph_of(&p, [0.0, 0.0]).unwrap();
        assert!(matches!(g.eval(0.5), Err(QmlError::Domain(_))));
    }

    #[test]
    fn gradients_agree_with_differences() {
        let syms = [
            SymbolSpec::CircleMinusOne,
            SymbolSpec::contact_circle(1, 0.7).unwrap(),
            SymbolSpec::GraphSymbol(GraphFn::BentCircle),
        ];
        let (x, xi) = ([0.3, -0.4], [0.8, 0.25]);
        for s in &syms {
            let g = s.xi_gradient(x, xi).unwrap();
            for i in 0..2 {
                let e = 1e-6;
                let mut p = xi;
                let mut m = xi;
                p[i] += e;
                m[i] -= e;
                let fd = (s.value(x, p) - s.value(x, m)) / (2.0 * e);
                assert!((fd - g[i]).abs() < 1e-8, "{} {i}", s.label());
            }
        }
    }
}
