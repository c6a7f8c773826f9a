use super::flow::{graph_symbol, trajectory, FlowKind, FlowState, HamiltonianFlow};
use crate::error::{QmlError, Result};
use crate::symbols::{GraphFn, SymbolSpec};

/// Symbols pulled back along the bicharacteristic flow of `a`:
/// `xi1 - a~`, `xi1 - q~` and `p~2 = xi1 + a~ - q~`.
#[derive(Debug, Clone)]
pub struct ConjugatedSymbols {
    pub a: SymbolSpec,
    pub q: SymbolSpec,
    pub p2: SymbolSpec,
}

#[derive(Debug, Clone)]
struct Pullback {
    flow_symbol: GraphFn,
    dt: f64,
    box_half_width: f64,
    max_time: f64,
    x2_range: (f64, f64),
    xi_range: (f64, f64),
}

impl Pullback {
    /// `(x2(x1), xi2(x1))` started from `(x2, xi2)`, or `None` outside the flow's grid.
    fn point(&self, x1: f64, x2: f64, xi2: f64) -> Option<(f64, f64)> {
        let inside = |v: f64, r: (f64, f64)| v >= r.0 && v <= r.1;
        if x1.abs() > self.max_time + 1e-12 || !inside(x2, self.x2_range) || !inside(xi2, self.xi_range) {
            return None;
        }
        if x1 == 0.0 {
            return Some((x2, xi2));
        }
        let start = FlowState { x2, xi2, action: 0.0, jac: [1.0, 0.0, 0.0, 1.0] };
        let (s, cut) = trajectory(&self.flow_symbol, start, &[x1], self.dt, 1.0, self.box_half_width);
        if cut {
            None
        } else {
            Some((s[0].x2, s[0].xi2))
        }
    }
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Egorov pullback `q~(x, xi2) = q(x1, x2(x1), xi2(x1))`, each evaluation integrating the flow
/// from `(x2, xi2)` to time `x1`. Evaluations outside the flow's time horizon or grid of
/// initial data return NaN.
pub fn conjugated_symbol(a: &SymbolSpec, q: &SymbolSpec, flow: &HamiltonianFlow) -> Result<ConjugatedSymbols> {
    let ga = graph_symbol(a)?;
    let gq = graph_symbol(q)?;
    if flow.kind != FlowKind::Bicharacteristic {
        return Err(QmlError::Domain("Egorov pullback needs the bicharacteristic flow".into()));
    }
    if ga != flow.symbol {
        return Err(QmlError::Domain(format!("flow was integrated for {}, not {}", flow.symbol, ga)));
    }
    let pb = Pullback {
        flow_symbol: ga.clone(),
        dt: flow.dt,
        box_half_width: flow.box_half_width,
        max_time: flow.max_time(),
        x2_range: range(&flow.x2_init),
        xi_range: range(&flow.xi_init),
    };
    let pull = |name: String, g: GraphFn, pb: Pullback| {
        SymbolSpec::custom(&name, true, move |x, xi| match pb.point(x[0], x[1], xi[1]) {
            Some((y, eta)) => xi[0] - g.eval(x[0], y, eta),
            None => f64::NAN,
        })
    };
    let a_t = pull(format!("pullback({ga})"), ga.clone(), pb.clone());
    let q_t = pull(format!("pullback({gq})"), gq.clone(), pb.clone());
    let p2 = SymbolSpec::custom(&format!("pullback({gq} - {ga})"), true, move |x, xi| match pb.point(x[0], x[1], xi[1]) {
        Some((y, eta)) => xi[0] + ga.eval(x[0], y, eta) - gq.eval(x[0], y, eta),
        None => f64::NAN,
    });
    Ok(ConjugatedSymbols { a: a_t, q: q_t, p2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::integrate_flow;
    use crate::symbols::{contact_order_at, ContactOrder};

    fn flow_for(a: &SymbolSpec, t_max: f64) -> HamiltonianFlow {
        let grid: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let xis: Vec<f64> = (0..9).map(|i| -0.8 + 0.2 * i as f64).collect();
        integrate_flow(a, &grid, &xis, &[t_max], None, FlowKind::Bicharacteristic, 10.0).unwrap()
    }

    #[test]
    fn identity_at_zero() {
        let a = SymbolSpec::GraphSymbol(GraphFn::BentCircle);
        let q = SymbolSpec::GraphSymbol(GraphFn::Perturbed { base: Box::new(GraphFn::BentCircle), k: 1, c: 1.0 });
        let c = conjugated_symbol(&a, &q, &flow_for(&a, 0.5)).unwrap();
        for &(x2, k) in &[(0.3, 0.2), (-0.7, -0.5), (0.0, 0.0)] {
            assert_eq!(c.q.value([0.0, x2], [1.0, k]), q.value([0.0, x2], [1.0, k]));
            assert_eq!(c.a.value([0.0, x2], [1.0, k]), a.value([0.0, x2], [1.0, k]));
        }
    }

    #[test]
    fn conserved_for_x_independent_pair() {
        let a = SymbolSpec::CircleMinusOne;
        let q = SymbolSpec::contact_circle(2, 1.0).unwrap();
        let c = conjugated_symbol(&a, &q, &flow_for(&a, 0.5)).unwrap();
        for &k in &[-0.4, 0.1, 0.6] {
            let base = c.p2.value([0.0, 0.2], [0.3, k]);
            for &x1 in &[0.1, 0.3, 0.5] {
                assert!((c.p2.value([x1, 0.2], [0.3, k]) - base).abs() < 1e-12);
            }
            assert!((base - (0.3 - k.powi(3))).abs() < 1e-14);
        }
    }

    #[test]
    fn contact_order_is_preserved() {
        let a = SymbolSpec::GraphSymbol(GraphFn::BentCircle);
        let flow = flow_for(&a, 0.3);
        for k in 1..=2u32 {
            let q = SymbolSpec::GraphSymbol(GraphFn::Perturbed { base: Box::new(GraphFn::BentCircle), k, c: 1.0 });
            let c = conjugated_symbol(&a, &q, &flow).unwrap();
            for &x1 in &[0.1, 0.3] {
                let top = 1.0 - c.a.value([x1, 0.0], [1.0, 0.0]);
                let r = contact_order_at(&c.a, &c.q, [x1, 0.0], [top, 0.0], 4).unwrap();
                assert_eq!(r.order, ContactOrder::Finite(k), "k = {k}, x1 = {x1}: {r:?}");
                assert!(!r.inconclusive);
            }
        }
    }

    #[test]
    fn outside_flow_is_nan_and_mismatch_refused() {
        let a = SymbolSpec::GraphSymbol(GraphFn::BentCircle);
        let flow = flow_for(&a, 0.3);
        let c = conjugated_symbol(&a, &a, &flow).unwrap();
        assert!(c.q.value([0.5, 0.0], [1.0, 0.0]).is_nan());
        assert!(c.q.value([0.1, 3.0], [1.0, 0.0]).is_nan());
        assert!(c.q.value([0.1, 0.0], [1.0, 0.95]).is_nan());
        assert!((c.p2.value([0.2, 0.1], [0.4, 0.1]) - 0.4).abs() < 1e-14);
        assert!(conjugated_symbol(&SymbolSpec::GraphSymbol(GraphFn::Free), &a, &flow).is_err());
        let gen = integrate_flow(&a, &[0.0], &[0.0], &[0.1], None, FlowKind::Generating, 10.0).unwrap();
        assert!(conjugated_symbol(&a, &a, &gen).is_err());
    }
}
