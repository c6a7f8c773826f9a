use super::dual::Dual2;
use crate::error::{QmlError, Result};
use crate::symbols::{GraphFn, SymbolSpec};
use rayon::prelude::*;

/// Largest integrator step.
pub const MAX_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    /// `x2' = a_xi2`, `xi2' = -a_x2`: the classical system used for pullbacks.
    Bicharacteristic,
    /// `y2' = -a_xi2`, `eta' = a_x2` with `phi' = a - eta a_xi2`: characteristics of the
    /// eikonal equation `d_x1 phi = a(x1, y2, d_y2 phi)`.
    Generating,
}

impl FlowKind {
    fn sign(self) -> f64 {
        match self {
            FlowKind::Bicharacteristic => 1.0,
            FlowKind::Generating => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowState {
    pub x2: f64,
    pub xi2: f64,
    /// Generating kind: the phase `phi`; otherwise the action `int (xi2 a_xi2 - a)`.
    pub action: f64,
    /// `[dx2/dx2_0, dx2/dxi2_0, dxi2/dx2_0, dxi2/dxi2_0]`.
    pub jac: [f64; 4],
}

impl FlowState {
    fn start(x2: f64, xi2: f64, kind: FlowKind) -> Self {
        let action = match kind {
            FlowKind::Generating => x2 * xi2,
            FlowKind::Bicharacteristic => 0.0,
        };
        FlowState { x2, xi2, action, jac: [1.0, 0.0, 0.0, 1.0] }
    }

    fn nan() -> Self {
        FlowState { x2: f64::NAN, xi2: f64::NAN, action: f64::NAN, jac: [f64::NAN; 4] }
    }

    pub fn det(&self) -> f64 {
        self.jac[0] * self.jac[3] - self.jac[1] * self.jac[2]
    }

    fn axpy(&self, d: &[f64; 7], s: f64) -> FlowState {
        FlowState {
            x2: self.x2 + s * d[0],
            xi2: self.xi2 + s * d[1],
            action: self.action + s * d[2],
            jac: [self.jac[0] + s * d[3], self.jac[1] + s * d[4], self.jac[2] + s * d[5], self.jac[3] + s * d[6]],
        }
    }
}

/// Trajectories of a graph symbol on a grid of initial data, recorded at `times`.
#[derive(Debug, Clone)]
pub struct HamiltonianFlow {
    pub symbol: GraphFn,
    pub kind: FlowKind,
    pub dt: f64,
    pub times: Vec<f64>,
    pub x2_init: Vec<f64>,
    pub xi_init: Vec<f64>,
    /// Trajectories leaving `|x2| <= box_half_width` or the symbol's domain are cut off.
    pub box_half_width: f64,
    /// `states[t][i_xi * x2_init.len() + i_x2]`; NaN after truncation.
    pub states: Vec<Vec<FlowState>>,
    pub truncated: Vec<bool>,
    /// Largest `|a(end) - a(start)|` over surviving trajectories.
    pub energy_drift: f64,
}

impl HamiltonianFlow {
    pub fn index(&self, i_xi: usize, i_x2: usize) -> usize {
        i_xi * self.x2_init.len() + i_x2
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().fold(0.0, |m, t| m.max(t.abs()))
    }
}

pub(crate) fn graph_symbol(a: &SymbolSpec) -> Result<GraphFn> {
    a.graph_fn().ok_or_else(|| QmlError::Domain(format!("{} is not of the form xi1 - a(x, xi2)", a.label())))
}

pub fn default_dt(x1_max: f64) -> f64 {
    if x1_max > 0.0 {
        MAX_DT.min(x1_max / 100.0)
    } else {
        MAX_DT
    }
}

fn rhs(a: &GraphFn, x1: f64, s: &FlowState, sign: f64) -> Option<[f64; 7]> {
    if !a.in_domain(s.xi2) {
        return None;
    }
    let d = a.eval_generic(x1, &Dual2::x(s.x2), &Dual2::k(s.xi2)).0;
    let [f, fx, fk, fxx, fxk, fkk] = d;
    if !d.iter().all(|v| v.is_finite()) {
        return None;
    }
    let [j11, j12, j21, j22] = s.jac;
    let action = if sign < 0.0 { f - s.xi2 * fk } else { s.xi2 * fk - f };
    Some([
        sign * fk,
        -sign * fx,
        action,
        sign * (fxk * j11 + fkk * j21),
        sign * (fxk * j12 + fkk * j22),
        -sign * (fxx * j11 + fxk * j21),
        -sign * (fxx * j12 + fxk * j22),
    ])
}

fn rk4(a: &GraphFn, t: f64, s: &FlowState, h: f64, sign: f64) -> Option<FlowState> {
    let k1 = rhs(a, t, s, sign)?;
    let k2 = rhs(a, t + h / 2.0, &s.axpy(&k1, h / 2.0), sign)?;
    let k3 = rhs(a, t + h / 2.0, &s.axpy(&k2, h / 2.0), sign)?;
    let k4 = rhs(a, t + h, &s.axpy(&k3, h), sign)?;
    let mut d = [0.0; 7];
    for i in 0..7 {
        d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    Some(s.axpy(&d, h))
}

/// Integrates one trajectory from `x1 = 0`, recording at each of `times` (any order, any sign).
pub(crate) fn trajectory(
    a: &GraphFn,
    start: FlowState,
    times: &[f64],
    dt: f64,
    sign: f64,
    box_half_width: f64,
) -> (Vec<FlowState>, bool) {
    let mut out = vec![FlowState::nan(); times.len()];
    let mut cut = false;
    for dir in [1.0, -1.0] {
        let mut order: Vec<usize> = (0..times.len()).filter(|&i| times[i] * dir > 0.0 || (dir > 0.0 && times[i] == 0.0)).collect();
        order.sort_by(|&i, &j| (times[i] * dir).total_cmp(&(times[j] * dir)));
        let (mut t, mut s) = (0.0, start);
        let mut alive = true;
        for i in order {
            let target = times[i];
            if alive {
                let steps = ((target - t).abs() / dt).ceil() as usize;
                let h = if steps > 0 { (target - t) / steps as f64 } else { 0.0 };
                for m in 0..steps {
                    match rk4(a, t + m as f64 * h, &s, h, sign) {
                        Some(n) if n.x2.abs() <= box_half_width => s = n,
                        _ => {
                            alive = false;
                            break;
                        }
                    }
                }
                t = target;
            }
            if alive {
                out[i] = s;
            } else {
                cut = true;
            }
        }
    }
    (out, cut)
}

/// RK4 integration of the Hamiltonian system with its variational equations.
pub fn integrate_flow(
    a: &SymbolSpec,
    x2_init: &[f64],
    xi_init: &[f64],
    times: &[f64],
    dt: Option<f64>,
    kind: FlowKind,
    box_half_width: f64,
) -> Result<HamiltonianFlow> {
    let g = graph_symbol(a)?;
    if x2_init.is_empty() || xi_init.is_empty() || times.is_empty() {
        return Err(QmlError::Domain("flow needs nonempty initial data and record times".into()));
    }
    if times.iter().chain(x2_init).chain(xi_init).any(|v| !v.is_finite()) {
        return Err(QmlError::Domain("flow inputs must be finite".into()));
    }
    let x1_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let dt = dt.unwrap_or_else(|| default_dt(x1_max));
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(QmlError::Domain(format!("integrator step must lie in (0, {MAX_DT}], got {dt}")));
    }
    let sign = kind.sign();
    let nx = x2_init.len();
    let runs: Vec<(Vec<FlowState>, bool)> = (0..xi_init.len() * nx)
        .into_par_iter()
        .map(|idx| {
            let (x, k) = (x2_init[idx % nx], xi_init[idx / nx]);
            if !g.in_domain(k) || x.abs() > box_half_width {
                return (vec![FlowState::nan(); times.len()], true);
            }
            trajectory(&g, FlowState::start(x, k, kind), times, dt, sign, box_half_width)
        })
        .collect();
    let mut states = vec![Vec::with_capacity(runs.len()); times.len()];
    let mut truncated = Vec::with_capacity(runs.len());
    let mut drift: f64 = 0.0;
    for (idx, (traj, cut)) in runs.into_iter().enumerate() {
        let (x, k) = (x2_init[idx % nx], xi_init[idx / nx]);
        for (t, s) in traj.into_iter().enumerate() {
            if s.x2.is_finite() {
                drift = drift.max((g.eval(times[t], s.x2, s.xi2) - g.eval(0.0, x, k)).abs());
            }
            states[t].push(s);
        }
        truncated.push(cut);
    }
    Ok(HamiltonianFlow {
        symbol: g,
        kind,
        dt,
        times: times.to_vec(),
        x2_init: x2_init.to_vec(),
        xi_init: xi_init.to_vec(),
        box_half_width,
        states,
        truncated,
        energy_drift: drift,
    })
}
