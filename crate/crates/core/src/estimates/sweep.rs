use super::{
    kernel_sample, kernel_sample_times, regime_bound, ExponentQuery, KernelPhase, Lebesgue,
};
use crate::error::{QmlError, Result};
use crate::grid::{lp_norm, Field2D, GridSpec};
use crate::propagator::{conjugated_symbol, integrate_flow, phase_table_with, quasimode_pushforward, FlowKind, PhaseOptions};
use crate::quasimodes::{build_t_alpha, joint_defect, TAlphaSpec};
use crate::symbols::{contact_order_at, ContactOrder, GraphFn, SymbolSpec};
use crate::wavelets::{
    coefficient_bound_check, cwt_forward, flat_model_field, spectral_coefficients, CwtCoefficients, DyadicPartition,
    ScaleGrid, WaveletSpec,
};
use rayon::prelude::*;
use std::fmt;
use std::time::Instant;

/// A number that may scale with `h`: `c` or `h^e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HValue {
    Const(f64),
    HPow(f64),
}

impl HValue {
    pub fn at(&self, h: f64) -> f64 {
        match *self {
            HValue::Const(c) => c,
            HValue::HPow(e) => h.powf(e),
        }
    }
}

impl fmt::Display for HValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HValue::Const(c) => write!(f, "{c}"),
            HValue::HPow(e) => write!(f, "h^{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// `T^h_alpha`, unit `L^2`.
    TAlpha { alpha: f64, smoothed_edges: bool },
    /// Gaussian in `x1` times an `x2` Gaussian of spectral width `spread h^(1/(k+1))`.
    FlatModel { k: u32, sigma1: f64, spread: f64 },
}

#[derive(Debug, Clone)]
pub enum Stage {
    Construct(Source),
    /// Pushes the field forward by the row maps `W(x1)` of `symbol` for `|x1| <= x1_max`.
    Propagate { symbol: SymbolSpec, x1_max: f64, xi_cut: Option<f64> },
    Cwt { per_decade: u32 },
    LpNorm { ps: Vec<Lebesgue> },
    /// `||p1^M1 p2^M2 u|| / ||u||` for each `(M1, M2)`.
    Defect { p1: SymbolSpec, p2: SymbolSpec, powers: Vec<(u32, u32)> },
    CoefficientBounds { k: u32 },
    Kernel { k: u32, js: Vec<u32>, scales: Vec<HValue> },
    Contact { base: GraphFn, ks: Vec<u32>, x1s: Vec<f64> },
}

/// What flows between stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Nothing,
    Field,
    Coefficients,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Nothing => "nothing",
            Kind::Field => "field",
            Kind::Coefficients => "coefficients",
        })
    }
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Construct(_) => "construct",
            Stage::Propagate { .. } => "propagate",
            Stage::Cwt { .. } => "cwt",
            Stage::LpNorm { .. } => "norm",
            Stage::Defect { .. } => "defect",
            Stage::CoefficientBounds { .. } => "coefficient_bounds",
            Stage::Kernel { .. } => "kernel",
            Stage::Contact { .. } => "contact",
        }
    }

    /// `(input, output)`; measurement stages pass their input through.
    pub fn signature(&self) -> (Kind, Kind) {
        match self {
            Stage::Construct(_) => (Kind::Nothing, Kind::Field),
            Stage::Propagate { .. } => (Kind::Field, Kind::Field),
            Stage::Cwt { .. } => (Kind::Field, Kind::Coefficients),
            Stage::LpNorm { .. } | Stage::Defect { .. } => (Kind::Field, Kind::Field),
            Stage::CoefficientBounds { .. } => (Kind::Coefficients, Kind::Coefficients),
            Stage::Kernel { .. } | Stage::Contact { .. } => (Kind::Nothing, Kind::Nothing),
        }
    }
}

/// Checks that each stage's input kind is the previous stage's output kind.
pub fn check_chain(stages: &[Stage]) -> std::result::Result<(), (usize, String)> {
    let mut have = Kind::Nothing;
    for (i, s) in stages.iter().enumerate() {
        let (need, out) = s.signature();
        if need != have {
            return Err((i, format!("stage '{}' needs {need} but receives {have}", s.name())));
        }
        have = out;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridChoice {
    /// Per-source default (the `T_alpha` default grid, or `L = 4, N = 128` for the flat model).
    Auto,
    Fixed { half_width: f64, n: usize },
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub grid: GridChoice,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub p: Option<Lebesgue>,
    pub k: Option<u32>,
    pub j: Option<u32>,
    pub alpha: Option<f64>,
    pub quantity: String,
    /// Extra coordinates, rendered into the quantity column as `name[key=value;...]`.
    pub params: Vec<(String, f64)>,
    pub value: f64,
}

impl Measurement {
    pub fn new(quantity: &str, value: f64) -> Self {
        Measurement { p: None, k: None, j: None, alpha: None, quantity: quantity.into(), params: Vec::new(), value }
    }

    pub fn param(mut self, key: &str, v: f64) -> Self {
        self.params.push((key.into(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|p| p.1)
    }

    pub fn label(&self) -> String {
        if self.params.is_empty() {
            return self.quantity.clone();
        }
        let inner: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}[{}]", self.quantity, inner.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h: f64,
    pub measurements: Vec<Measurement>,
    /// `(stage name, reason)` when a stage refused; earlier measurements are kept.
    pub refused: Option<(String, String)>,
    /// Wall-clock seconds per executed stage; not part of the CSV.
    pub timings: Vec<(String, f64)>,
}

pub const CSV_HEADER: &str = "experiment,h,p,k,j,alpha,quantity,value";

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), |v| v.to_string())
}

/// Measurement CSV; refused stages appear as `refused[stage]` rows with value `nan`.
pub fn sweep_csv(experiment: &str, rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        for m in &r.measurements {
            out.push_str(&format!(
                "{experiment},{},{},{},{},{},{},{}\n",
                r.h,
                opt(&m.p),
                opt(&m.k),
                opt(&m.j),
                opt(&m.alpha),
                m.label(),
                m.value
            ));
        }
        if let Some((stage, _)) = &r.refused {
            out.push_str(&format!("{experiment},{},,,,,refused[{stage}],nan\n", r.h));
        }
    }
    out
}

enum Artifact {
    Nothing,
    Field(Field2D, Option<f64>),
    Coefficients(CwtCoefficients),
}

/// Runs the pipeline once per `h`, in parallel over `h`, returning rows in `h_list` order.
pub fn run_sweep(experiment: &Experiment, h_list: &[f64]) -> Vec<SweepRow> {
    if let Err((i, msg)) = check_chain(&experiment.stages) {
        return h_list
            .iter()
            .map(|&h| SweepRow {
                h,
                measurements: Vec::new(),
                refused: Some((format!("stage {}", i + 1), msg.clone())),
                timings: Vec::new(),
            })
            .collect();
    }
    h_list.par_iter().map(|&h| run_one(experiment, h)).collect()
}

fn run_one(ex: &Experiment, h: f64) -> SweepRow {
    let mut row = SweepRow { h, measurements: Vec::new(), refused: None, timings: Vec::new() };
    let mut art = Artifact::Nothing;
    for stage in &ex.stages {
        let start = Instant::now();
        let result = run_stage(ex, stage, h, art, &mut row.measurements);
        row.timings.push((stage.name().to_string(), start.elapsed().as_secs_f64()));
        match result {
            Ok(next) => art = next,
            Err(e) => {
                row.refused = Some((stage.name().to_string(), e.to_string()));
                break;
            }
        }
    }
    row
}

fn grid_for(choice: GridChoice, h: f64, auto: impl FnOnce() -> Result<GridSpec>) -> Result<GridSpec> {
    match choice {
        GridChoice::Auto => auto(),
        GridChoice::Fixed { half_width, n } => GridSpec::new(half_width, n, h),
    }
}

fn run_stage(ex: &Experiment, stage: &Stage, h: f64, art: Artifact, out: &mut Vec<Measurement>) -> Result<Artifact> {
    match (stage, art) {
        (Stage::Construct(Source::TAlpha { alpha, smoothed_edges }), _) => {
            let mut spec = TAlphaSpec::new(h, *alpha)?;
            spec.smoothed_edges = *smoothed_edges;
            let g = grid_for(ex.grid, h, || spec.default_grid())?;
            Ok(Artifact::Field(build_t_alpha(&spec, &g)?, Some(*alpha)))
        }
        (Stage::Construct(Source::FlatModel { k, sigma1, spread }), _) => {
            let g = grid_for(ex.grid, h, || GridSpec::new(4.0, 128, h))?;
            Ok(Artifact::Field(flat_model_field(g, *k, *sigma1, *spread)?, None))
        }
        (Stage::Propagate { symbol, x1_max, xi_cut }, Artifact::Field(u, alpha)) => {
            let g = u.grid;
            let times: Vec<f64> = (0..g.n).map(|i| g.x(i)).filter(|x| x.abs() <= *x1_max).collect();
            let opts = PhaseOptions { xi_cut: *xi_cut, ..PhaseOptions::default() };
            let table = phase_table_with(symbol, g, &times, opts)?;
            let v = quasimode_pushforward(&table, &u)?;
            out.push(Measurement::new("propagated_l2", v.l2_norm() / u.l2_norm()).param("x1_max", *x1_max));
            Ok(Artifact::Field(v, alpha))
        }
        (Stage::Cwt { per_decade }, Artifact::Field(u, _)) => {
            let g = u.grid;
            let d = ScaleGrid::default_for(&g)?;
            let lo = d.scale(d.m_min);
            let sg = ScaleGrid::covering(lo, 4.0f64.min(g.half_width), *per_decade)?;
            let x = cwt_forward(&u, &WaveletSpec::poly_bump(), &sg)?;
            Ok(Artifact::Coefficients(spectral_coefficients(&x)?))
        }
        (Stage::LpNorm { ps }, Artifact::Field(u, alpha)) => {
            for p in ps {
                let mut m = Measurement::new("lp_norm", lp_norm(&u, p.to_f64())?);
                m.p = Some(*p);
                m.alpha = alpha;
                out.push(m);
            }
            Ok(Artifact::Field(u, alpha))
        }
        (Stage::Defect { p1, p2, powers }, Artifact::Field(u, alpha)) => {
            for &(m1, m2) in powers {
                let r = joint_defect(p1, p2, &u, m1, m2)?;
                let mut m = Measurement::new("defect_ratio", r.ratio_to_power).param("M1", m1 as f64).param("M2", m2 as f64);
                m.alpha = alpha;
                out.push(m);
            }
            Ok(Artifact::Field(u, alpha))
        }
        (Stage::CoefficientBounds { k }, Artifact::Coefficients(x)) => {
            let part = DyadicPartition::new(h, *k)?;
            let r = coefficient_bound_check(&x, &part)?;
            for s in &r.samples {
                let mut m = Measurement::new("coeff_norm", s.value).param("a", s.a);
                m.k = Some(*k);
                m.j = Some(s.j);
                out.push(m);
            }
            for (q, v) in [("coeff_constant", r.constant), ("coeff_worst_small", r.worst_small), ("coeff_worst_large", r.worst_large)] {
                let mut m = Measurement::new(q, v);
                m.k = Some(*k);
                out.push(m);
            }
            Ok(Artifact::Coefficients(x))
        }
        (Stage::Kernel { k, js, scales }, Artifact::Nothing) => {
            let part = DyadicPartition::new(h, *k)?;
            let w = WaveletSpec::poly_bump();
            for sc in scales {
                let a = sc.at(h);
                for &j in js {
                    for t in kernel_sample_times(h, *k, j, a) {
                        let s = kernel_sample(KernelPhase::Flat(GraphFn::Free), &w, &part, j, a, t)?;
                        let mut m = Measurement::new("kernel_ratio", s.sup / regime_bound(h, *k, j, a, t))
                            .param("a", a)
                            .param("t", t)
                            .param("large", if s.regime == super::Regime::LargeSep { 1.0 } else { 0.0 });
                        m.k = Some(*k);
                        m.j = Some(j);
                        out.push(m);
                    }
                }
            }
            Ok(Artifact::Nothing)
        }
        (Stage::Contact { base, ks, x1s }, Artifact::Nothing) => {
            let a = SymbolSpec::GraphSymbol(base.clone());
            let t_max = x1s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let x2s: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
            let xis: Vec<f64> = (0..9).map(|i| -0.8 + 0.2 * i as f64).collect();
            let flow = integrate_flow(&a, &x2s, &xis, &[t_max], None, FlowKind::Bicharacteristic, 10.0)?;
            for &k in ks {
                let q = SymbolSpec::GraphSymbol(GraphFn::Perturbed { base: Box::new(base.clone()), k, c: 1.0 });
                let c = conjugated_symbol(&a, &q, &flow)?;
                for &x1 in x1s {
                    let top = 1.0 - c.a.value([x1, 0.0], [1.0, 0.0]);
                    let r = contact_order_at(&c.a, &c.q, [x1, 0.0], [top, 0.0], 6)?;
                    let order = match r.order {
                        ContactOrder::Finite(o) if !r.inconclusive => o as f64,
                        _ => f64::NAN,
                    };
                    let mut m = Measurement::new("contact_order", order).param("x1", x1);
                    m.k = Some(k);
                    out.push(m);
                }
            }
            Ok(Artifact::Nothing)
        }
        (s, _) => Err(QmlError::Domain(format!("stage '{}' received the wrong input", s.name()))),
    }
}

/// `(h, value)` pairs for one quantity, skipping refused or non-positive entries.
pub fn series(rows: &[SweepRow], pick: impl Fn(&Measurement) -> bool) -> Vec<(f64, f64)> {
    rows.iter()
        .flat_map(|r| r.measurements.iter().filter(|m| pick(m)).map(move |m| (r.h, m.value)))
        .filter(|&(_, v)| v.is_finite())
        .collect()
}

/// Query used for kernel bound checks of a `kernel` stage.
pub fn kernel_query(k: u32) -> Result<ExponentQuery> {
    ExponentQuery::new(Lebesgue::Infinity, k, 0)
}
