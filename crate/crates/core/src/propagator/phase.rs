use super::flow::{default_dt, graph_symbol, trajectory, FlowState};
use crate::error::{QmlError, Result};
use crate::grid::GridSpec;
use crate::symbols::{GraphFn, SymbolSpec};
use rayon::prelude::*;

/// `d_y2 y2(x1; y2_0)` below this marks the onset of a caustic.
pub const CAUSTIC_THRESHOLD: f64 = 0.1;

/// Lattice cut used for graphs with a bounded `xi2` domain.
pub const BOUNDED_DOMAIN_CUT: f64 = 0.9;

const MAX_EXTENSIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Largest `|xi2|` kept; default is `0.9` times the domain bound, or the whole lattice.
    pub xi_cut: Option<f64>,
    /// Amplitude `(d_y2 y2)^{-1/2}` from the transport equation; otherwise `b = 1`.
    pub transport_correction: bool,
    pub dt: Option<f64>,
    pub caustic_threshold: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions { xi_cut: None, transport_correction: true, dt: None, caustic_threshold: CAUSTIC_THRESHOLD }
    }
}

/// Phase `phi(x1, y2, xi2)` and amplitude `b` on the field grid in `y2`, for each record
/// time and each kept lattice frequency.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    pub grid: GridSpec,
    pub symbol: GraphFn,
    pub times: Vec<f64>,
    /// Times at or beyond a caustic, or with incomplete coverage, are invalid.
    pub valid: Vec<bool>,
    /// Centred lattice indices of the kept frequencies.
    pub xi_index: Vec<usize>,
    /// `[t][xi][j]`, flattened.
    phase: Vec<f64>,
    amp: Vec<f64>,
    /// `(lowest, highest)` record time reachable without crossing an invalid one.
    pub horizon: (f64, f64),
    pub min_jacobian: f64,
    pub energy_drift: f64,
    pub dt: f64,
    pub warnings: Vec<String>,
}

impl PhaseTable {
    /// Reassembles a table from decoded parts; `phase` and `amp` are `[t][xi][j]`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        grid: GridSpec,
        symbol: GraphFn,
        times: Vec<f64>,
        valid: Vec<bool>,
        xi_index: Vec<usize>,
        phase: Vec<f64>,
        amp: Vec<f64>,
        horizon: (f64, f64),
        stats: [f64; 3],
    ) -> Result<Self> {
        grid.validate()?;
        let cells = times.len() * xi_index.len() * grid.n;
        if valid.len() != times.len() || phase.len() != cells || amp.len() != cells {
            return Err(QmlError::Shape("phase table arrays do not match its axes".into()));
        }
        if xi_index.iter().any(|&k| k >= grid.n) {
            return Err(QmlError::Shape("frequency index outside the lattice".into()));
        }
        if let Some(i) = times.iter().chain(&phase).chain(&amp).position(|v| !v.is_finite()) {
            return Err(QmlError::NonFinite(i));
        }
        let [min_jacobian, energy_drift, dt] = stats;
        Ok(PhaseTable {
            grid,
            symbol,
            times,
            valid,
            xi_index,
            phase,
            amp,
            horizon,
            min_jacobian,
            energy_drift,
            dt,
            warnings: Vec::new(),
        })
    }

    fn offset(&self, t: usize, k: usize) -> usize {
        (t * self.xi_index.len() + k) * self.grid.n
    }

    pub fn phase_row(&self, t: usize, k: usize) -> &[f64] {
        let o = self.offset(t, k);
        &self.phase[o..o + self.grid.n]
    }

    pub fn amp_row(&self, t: usize, k: usize) -> &[f64] {
        let o = self.offset(t, k);
        &self.amp[o..o + self.grid.n]
    }

    pub fn xi(&self, k: usize) -> f64 {
        self.grid.xi(self.xi_index[k])
    }

    /// `a(0, 0, 0)`: the x1 frequency removed by `W`, carried separately on 2-D fields.
    pub fn x1_carrier_shift(&self) -> f64 {
        self.symbol.eval(0.0, 0.0, 0.0)
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
    }

    /// Index of `t`, or an error if it is absent or past the horizon.
    pub fn usable_time(&self, t: f64) -> Result<usize> {
        let i = self
            .time_index(t)
            .ok_or_else(|| QmlError::Domain(format!("x1 = {t} is not a record time of the phase table")))?;
        if !self.valid[i] {
            return Err(QmlError::Caustic(format!("x1 = {t} lies beyond the phase horizon {:?}", self.horizon)));
        }
        Ok(i)
    }
}

enum Failure {
    Range { low: bool, high: bool },
    Caustic(f64),
}

struct XiRows {
    /// Per time: `(phi, b, min J11)` or the failure.
    rows: Vec<std::result::Result<(Vec<f64>, Vec<f64>, f64), Failure>>,
    drift: f64,
}

fn hermite(y0: f64, y1: f64, p0: f64, p1: f64, m0: f64, m1: f64, y: f64) -> f64 {
    let d = y1 - y0;
    let s = (y - y0) / d;
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * d * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * d * m1
}

/// Interpolates the characteristic data of one time onto the field grid.
fn resample(
    grid: &GridSpec,
    nodes: &[FlowState],
    transport: bool,
    threshold: f64,
) -> std::result::Result<(Vec<f64>, Vec<f64>, f64), Failure> {
    let n = grid.n;
    let (lo, hi) = (grid.x(0), grid.x(n - 1));
    // The covering run: last node at or below `lo` through the first node at or above `hi`.
    let first = nodes.iter().rposition(|s| s.x2.is_finite() && s.x2 <= lo);
    let last = nodes.iter().position(|s| s.x2.is_finite() && s.x2 >= hi);
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) if f < l => (f, l),
        (f, l) => return Err(Failure::Range { low: f.is_none(), high: l.is_none() }),
    };
    let run = &nodes[first..=last];
    if run.iter().any(|s| !s.x2.is_finite()) {
        return Err(Failure::Range { low: true, high: true });
    }
    let mut min_j = f64::INFINITY;
    for w in run.windows(2) {
        if !(w[1].x2 > w[0].x2) {
            return Err(Failure::Caustic(f64::NEG_INFINITY));
        }
    }
    for s in run {
        min_j = min_j.min(s.jac[0]);
    }
    if min_j < threshold {
        return Err(Failure::Caustic(min_j));
    }
    let mut phi = Vec::with_capacity(n);
    let mut amp = Vec::with_capacity(n);
    let mut k = 0;
    for j in 0..n {
        let y = grid.x(j);
        while run[k + 1].x2 < y {
            k += 1;
        }
        let (a, b) = (&run[k], &run[k + 1]);
        phi.push(hermite(a.x2, b.x2, a.action, b.action, a.xi2, b.xi2, y));
        amp.push(if transport {
            let s = (y - a.x2) / (b.x2 - a.x2);
            ((1.0 - s) * a.jac[0] + s * b.jac[0]).powf(-0.5)
        } else {
            1.0
        });
    }
    Ok((phi, amp, min_j))
}

#[allow(clippy::too_many_arguments)]
fn build_xi(
    g: &GraphFn,
    grid: &GridSpec,
    xi: f64,
    times: &[f64],
    dt: f64,
    opts: &PhaseOptions,
    mut pad: [usize; 2],
) -> XiRows {
    let n = grid.n as i64;
    let dx = grid.dx();
    let mut extensions = 0;
    loop {
        let ks = -(pad[0] as i64)..(n + pad[1] as i64);
        let box_half = f64::INFINITY;
        let runs: Vec<Vec<FlowState>> = ks
            .clone()
            .map(|k| {
                let y0 = grid.x(0) + k as f64 * dx;
                let start = FlowState { x2: y0, xi2: xi, action: y0 * xi, jac: [1.0, 0.0, 0.0, 1.0] };
                trajectory(g, start, times, dt, -1.0, box_half).0
            })
            .collect();
        let t0 = times.iter().position(|&v| v == 0.0).unwrap_or(0);
        let mut drift: f64 = 0.0;
        let mut rows = Vec::with_capacity(times.len());
        let (mut grow_low, mut grow_high) = (false, false);
        for (t, &tt) in times.iter().enumerate() {
            let nodes: Vec<FlowState> = runs.iter().map(|r| r[t]).collect();
            for (r, s) in runs.iter().zip(&nodes) {
                if s.x2.is_finite() {
                    drift = drift.max((g.eval(tt, s.x2, s.xi2) - g.eval(0.0, r[t0].x2, r[t0].xi2)).abs());
                }
            }
            rows.push(resample(grid, &nodes, opts.transport_correction, opts.caustic_threshold));
        }
        // Coverage past a caustic on the same side is irrelevant.
        let caustic_hi = times.iter().zip(&rows).filter(|(t, r)| **t > 0.0 && matches!(r, Err(Failure::Caustic(_))));
        let hi = caustic_hi.map(|(t, _)| *t).fold(f64::INFINITY, f64::min);
        let caustic_lo = times.iter().zip(&rows).filter(|(t, r)| **t < 0.0 && matches!(r, Err(Failure::Caustic(_))));
        let lo = caustic_lo.map(|(t, _)| *t).fold(f64::NEG_INFINITY, f64::max);
        for (&tt, row) in times.iter().zip(&rows) {
            if let Err(Failure::Range { low, high }) = row {
                if tt > lo && tt < hi {
                    grow_low |= *low;
                    grow_high |= *high;
                }
            }
        }
        if !(grow_low || grow_high) || extensions == MAX_EXTENSIONS {
            return XiRows { rows, drift };
        }
        extensions += 1;
        if grow_low {
            pad[0] = 2 * pad[0] + 4;
        }
        if grow_high {
            pad[1] = 2 * pad[1] + 4;
        }
    }
}

pub fn phase_table(a: &SymbolSpec, grid: GridSpec, times: &[f64]) -> Result<PhaseTable> {
    phase_table_with(a, grid, times, PhaseOptions::default())
}

/// Solves `d_x1 phi = a(x1, y2, d_y2 phi)`, `phi(0) = y2 xi2`, by characteristics and
/// resamples onto the field grid at every record time.
pub fn phase_table_with(a: &SymbolSpec, grid: GridSpec, times: &[f64], opts: PhaseOptions) -> Result<PhaseTable> {
    grid.validate()?;
    let g = graph_symbol(a)?;
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(QmlError::Domain("phase table needs finite record times".into()));
    }
    if !(opts.caustic_threshold > 0.0 && opts.caustic_threshold < 1.0) {
        return Err(QmlError::Domain("caustic threshold must lie in (0, 1)".into()));
    }
    let t_max = times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let dt = opts.dt.unwrap_or_else(|| default_dt(t_max));
    if !(dt > 0.0 && dt <= super::flow::MAX_DT) {
        return Err(QmlError::Domain(format!("integrator step must lie in (0, {}], got {dt}", super::flow::MAX_DT)));
    }
    let (dlo, dhi) = g.xi_domain();
    let cut = match opts.xi_cut {
        Some(c) if c > 0.0 => c,
        Some(c) => return Err(QmlError::Domain(format!("xi cut must be positive, got {c}"))),
        None if dlo.is_finite() || dhi.is_finite() => BOUNDED_DOMAIN_CUT * dlo.abs().min(dhi.abs()),
        None => f64::INFINITY,
    };
    let xi_index: Vec<usize> =
        (0..grid.n).filter(|&s| grid.xi(s).abs() <= cut && g.in_domain(grid.xi(s))).collect();
    if xi_index.is_empty() {
        return Err(QmlError::Domain(format!("no lattice frequency within |xi2| <= {cut}")));
    }
    // Record the start so drift is measured against it.
    let mut all_times = times.to_vec();
    if !all_times.contains(&0.0) {
        all_times.push(0.0);
    }
    let dx = grid.dx();
    let pads: Vec<[usize; 2]> = xi_index
        .iter()
        .map(|&s| {
            let xi = grid.xi(s);
            let speed = [grid.x(0), 0.0, -grid.x(0)]
                .iter()
                .map(|&y| g.gradient(0.0, y, xi).map(|d| d[2].abs()).unwrap_or(0.0))
                .fold(0.0, f64::max);
            let p = ((speed * t_max) / dx).ceil() as usize + 4;
            [p, p]
        })
        .collect();
    let built: Vec<XiRows> = xi_index
        .par_iter()
        .zip(pads.par_iter())
        .map(|(&s, &pad)| build_xi(&g, &grid, grid.xi(s), &all_times, dt, &opts, pad))
        .collect();

    let nt = times.len();
    let nk = xi_index.len();
    let n = grid.n;
    let mut phase = vec![f64::NAN; nt * nk * n];
    let mut amp = vec![f64::NAN; nt * nk * n];
    let mut ok = vec![true; nt];
    let mut min_jacobian = f64::INFINITY;
    let mut drift: f64 = 0.0;
    let mut warnings = Vec::new();
    for (k, b) in built.iter().enumerate() {
        drift = drift.max(b.drift);
        for t in 0..nt {
            match &b.rows[t] {
                Ok((p, w, mj)) => {
                    let o = (t * nk + k) * n;
                    phase[o..o + n].copy_from_slice(p);
                    amp[o..o + n].copy_from_slice(w);
                    min_jacobian = min_jacobian.min(*mj);
                }
                Err(_) => ok[t] = false,
            }
        }
    }
    let hi = times.iter().zip(&ok).filter(|(t, v)| **t > 0.0 && !**v).map(|(t, _)| *t).fold(f64::INFINITY, f64::min);
    let lo = times.iter().zip(&ok).filter(|(t, v)| **t < 0.0 && !**v).map(|(t, _)| *t).fold(f64::NEG_INFINITY, f64::max);
    let valid: Vec<bool> = times.iter().map(|&t| t > lo && t < hi).collect();
    let reach_hi = times.iter().zip(&valid).filter(|(_, v)| **v).map(|(t, _)| *t).fold(0.0, f64::max);
    let reach_lo = times.iter().zip(&valid).filter(|(_, v)| **v).map(|(t, _)| *t).fold(0.0, f64::min);
    if hi.is_finite() || lo.is_finite() {
        let jac = built
            .iter()
            .flat_map(|b| &b.rows)
            .filter_map(|r| match r {
                Err(Failure::Caustic(j)) => Some(*j),
                _ => None,
            })
            .fold(f64::INFINITY, f64::min);
        let why = if jac.is_finite() {
            format!("caustic, Jacobian {jac:.3e}")
        } else if jac == f64::NEG_INFINITY {
            "characteristics cross".to_string()
        } else {
            "incomplete coverage of the grid by characteristics".to_string()
        };
        warnings.push(format!("phase horizon shortened to [{reach_lo}, {reach_hi}] ({why})"));
    }
    Ok(PhaseTable {
        grid,
        symbol: g,
        times: times.to_vec(),
        valid,
        xi_index,
        phase,
        amp,
        horizon: (reach_lo, reach_hi),
        min_jacobian,
        energy_drift: drift,
        dt,
        warnings,
    })
}

/// Largest `|d_x1 phi - a(x1, y2, d_y2 phi)|` at record time `times[ti]`, from fourth-order
/// central differences over the neighbouring record times and grid points.
pub fn eikonal_residual(table: &PhaseTable, ti: usize) -> Result<f64> {
    let ts = &table.times;
    if ti < 2 || ti + 2 >= ts.len() {
        return Err(QmlError::Domain("eikonal residual needs two record times on each side".into()));
    }
    let d = ts[ti + 1] - ts[ti];
    for (i, w) in ts[ti - 2..=ti + 2].windows(2).enumerate() {
        if ((w[1] - w[0]) - d).abs() > 1e-9 * d.abs() || d == 0.0 {
            return Err(QmlError::Domain(format!("record times around index {ti} are not uniform (gap {i})")));
        }
    }
    if !(ti - 2..=ti + 2).all(|i| table.valid[i]) {
        return Err(QmlError::Caustic("residual stencil crosses the phase horizon".into()));
    }
    let g = &table.grid;
    let dx = g.dx();
    let t = ts[ti];
    let mut worst: f64 = 0.0;
    for k in 0..table.xi_index.len() {
        let p = |i: usize| table.phase_row(i, k);
        let (pm2, pm1, p0, pp1, pp2) = (p(ti - 2), p(ti - 1), p(ti), p(ti + 1), p(ti + 2));
        for j in 2..g.n - 2 {
            let phi_t = (pm2[j] - 8.0 * pm1[j] + 8.0 * pp1[j] - pp2[j]) / (12.0 * d);
            let phi_y = (p0[j - 2] - 8.0 * p0[j - 1] + 8.0 * p0[j + 1] - p0[j + 2]) / (12.0 * dx);
            let r = phi_t - table.symbol.eval(t, g.x(j), phi_y);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}
