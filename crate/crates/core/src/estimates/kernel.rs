use super::ExponentQuery;
use crate::error::{QmlError, Result};
use crate::grid::fft::plan;
use crate::propagator::PhaseTable;
use crate::symbols::GraphFn;
use crate::wavelets::{DyadicPartition, WaveletSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use std::f64::consts::PI;

/// Lower limit on quadrature nodes per `2 pi h` period of the `xi2` phase.
pub const MIN_POINTS_PER_PERIOD: f64 = 8.0;

const OVERLAP_INTERVALS: usize = 4096;
const MAX_NODES: usize = 1 << 22;
const MIN_BAND_NODES: f64 = 512.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SmallSep,
    LargeSep,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::SmallSep => "small_sep",
            Regime::LargeSep => "large_sep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    pub h: f64,
    pub k: u32,
    pub j: u32,
    pub a: f64,
    /// `x1 - z1`.
    pub t: f64,
    /// `sup_{x2, z2} |K_j|`.
    pub sup: f64,
    pub regime: Regime,
}

/// `2^(-2j) h^(1 - 2/(k+1))`.
pub fn regime_threshold(h: f64, k: u32, j: u32) -> f64 {
    2f64.powi(-2 * j as i32) * h.powf(1.0 - 2.0 / (k as f64 + 1.0))
}

pub fn regime_of(h: f64, k: u32, j: u32, t: f64) -> Regime {
    if t.abs() <= regime_threshold(h, k, j) {
        Regime::SmallSep
    } else {
        Regime::LargeSep
    }
}

/// `a 2^j h^(-1 + 1/(k+1))` below the threshold, `a h^(-1/2) t^(-1/2)` above it.
pub fn regime_bound(h: f64, k: u32, j: u32, a: f64, t: f64) -> f64 {
    match regime_of(h, k, j, t) {
        Regime::SmallSep => a * 2f64.powi(j as i32) * h.powf(-1.0 + 1.0 / (k as f64 + 1.0)),
        Regime::LargeSep => a * (h * t.abs()).powf(-0.5),
    }
}

/// Separations used by the kernel suites: `0` and `2^m` times the regime threshold, kept to
/// `t <= 1` and away from the zero of the wavelet autocorrelation (`t / a <= 1/4` or
/// `0.7 <= t / a <= 1`).
pub fn kernel_sample_times(h: f64, k: u32, j: u32, a: f64) -> Vec<f64> {
    let ts = regime_threshold(h, k, j);
    let mut out = vec![0.0];
    for m in -2..=10 {
        let t = ts * 2f64.powi(m);
        let r = t / a;
        if t <= 1.0 && (r <= 0.25 || (0.7..=1.0).contains(&r)) {
            out.push(t);
        }
    }
    out
}

pub enum KernelPhase<'a> {
    /// `phi(x1, y, xi) = y xi + x1 a(xi)` for an x-independent graph `a`.
    Flat(GraphFn),
    /// Tabulated phase and amplitude; `z1 = 0` uses the initial phase `y xi`.
    Table(&'a PhaseTable),
}

#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    pub points_per_period: f64,
    /// Zero-padding factor of the `xi2` FFT that samples the supremum over `x2 - z2`.
    pub pad: usize,
    /// Tabulated path: `x2, z2` range over `|y| <= pair_window`.
    pub pair_window: f64,
    pub pair_points: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { points_per_period: MIN_POINTS_PER_PERIOD, pad: 16, pair_window: 0.25, pair_points: 33 }
    }
}

/// `int f(v + s) f(v) dv`.
pub fn wavelet_overlap(w: &WaveletSpec, s: f64) -> f64 {
    let r = w.support;
    if s.abs() >= 2.0 * r {
        return 0.0;
    }
    // Overlap of the two supports.
    let (lo, hi) = ((-r).max(-r - s), r.min(r - s));
    let n = OVERLAP_INTERVALS;
    let dv = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let v = lo + i as f64 * dv;
        let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += wgt * w.f(v + s) * w.f(v);
    }
    acc * dv / 3.0
}

/// `chi^2(2^-j h^(-1/(k+1)) |xi|)`, or `chi0^2` for `j = 0`. Bands above `J` are allowed.
pub fn band_weight_sq(part: &DyadicPartition, j: u32, xi: f64) -> f64 {
    let s = xi.abs() / part.unit();
    let c = if j == 0 { DyadicPartition::chi0(s) } else { DyadicPartition::chi(s / 2f64.powi(j as i32)) };
    c * c
}

/// Largest `|xi2|` in the support of band `j`.
pub fn band_reach(part: &DyadicPartition, j: u32) -> f64 {
    1.5 * 2f64.powi(j as i32) * part.unit()
}

/// `sup_{x2, z2} |K_j(t, x2, 0, z2)|` with the `b` integral done against the mother wavelet.
pub fn kernel_sample(
    phase: KernelPhase<'_>,
    w: &WaveletSpec,
    part: &DyadicPartition,
    j: u32,
    a: f64,
    t: f64,
) -> Result<KernelSample> {
    kernel_sample_with(phase, w, part, j, a, t, KernelOptions::default())
}

pub fn kernel_sample_with(
    phase: KernelPhase<'_>,
    w: &WaveletSpec,
    part: &DyadicPartition,
    j: u32,
    a: f64,
    t: f64,
    opts: KernelOptions,
) -> Result<KernelSample> {
    if !(a.is_finite() && a > 0.0) {
        return Err(QmlError::Domain(format!("scale a must be positive, got {a}")));
    }
    if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
        return Err(QmlError::Domain(format!("separation must lie in [0, 1], got {t}")));
    }
    if opts.points_per_period < MIN_POINTS_PER_PERIOD {
        return Err(QmlError::UnderResolved(format!(
            "{} points per period is below {MIN_POINTS_PER_PERIOD}",
            opts.points_per_period
        )));
    }
    let h = part.h;
    let sample = |sup: f64| KernelSample { h, k: part.k, j, a, t, sup, regime: regime_of(h, part.k, j, t) };
    let b_factor = a * wavelet_overlap(w, t / a).abs();
    if t >= 2.0 * a * w.support {
        return Ok(sample(0.0));
    }
    let xi_sup = match phase {
        KernelPhase::Flat(g) => flat_sup(&g, part, j, t, opts)?,
        KernelPhase::Table(table) => table_sup(table, part, j, t, opts)?,
    };
    let sup = b_factor * xi_sup;
    if !sup.is_finite() {
        return Err(QmlError::NonFinite(0));
    }
    Ok(sample(sup))
}

/// `sup_s |(2 pi h)^-1 int e^{i (s xi + t a(xi)) / h} chi^2 dxi|`, sampled by a padded FFT in `s`.
fn flat_sup(g: &GraphFn, part: &DyadicPartition, j: u32, t: f64, opts: KernelOptions) -> Result<f64> {
    if g.is_x_dependent() {
        return Err(QmlError::Domain(format!("flat kernel phase needs an x-independent graph, got {g}")));
    }
    let h = part.h;
    let reach = band_reach(part, j);
    if !(g.in_domain(-reach) && g.in_domain(reach)) {
        return Err(QmlError::Domain(format!("band {j} reaches |xi2| = {reach}, outside the domain of {g}")));
    }
    let probe = 2049;
    let mut speed: f64 = 0.0;
    for i in 0..probe {
        let xi = -reach + 2.0 * reach * i as f64 / (probe - 1) as f64;
        speed = speed.max(g.gradient(0.0, 0.0, xi)?[2].abs());
    }
    // Stationary points sit at |s| <= t speed; the band's own width adds h / (2^j h^(1/(k+1))).
    let s_max = t * speed + 8.0 * h / (2f64.powi(j as i32) * part.unit());
    let dxi = (2.0 * PI * h / (opts.points_per_period * (s_max + t * speed))).min(2.0 * reach / MIN_BAND_NODES);
    let m = (2.0 * reach / dxi).ceil() as usize + 1;
    let p = (m * opts.pad.max(1)).next_power_of_two();
    if p > MAX_NODES {
        return Err(QmlError::CostGuard(format!("kernel quadrature needs {p} nodes")));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for (i, z) in buf.iter_mut().take(m).enumerate() {
        let xi = -reach + i as f64 * dxi;
        let wgt = band_weight_sq(part, j, xi);
        if wgt > 0.0 {
            *z = Complex64::from_polar(wgt, t * g.eval(0.0, 0.0, xi) / h);
        }
    }
    plan(p, FftDirection::Inverse).process(&mut buf);
    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(peak * dxi / (2.0 * PI * h))
}

fn table_sup(table: &PhaseTable, part: &DyadicPartition, j: u32, t: f64, opts: KernelOptions) -> Result<f64> {
    let g = table.grid;
    let h = part.h;
    if (g.h - h).abs() > 1e-12 * h {
        return Err(QmlError::Domain(format!("phase table built for h = {}, partition for h = {h}", g.h)));
    }
    let ti = table.usable_time(t)?;
    let reach = band_reach(part, j);
    let nk = table.xi_index.len();
    let (lo, hi) = (table.xi(0), table.xi(nk - 1));
    if -reach < lo - g.dxi() || reach > hi + g.dxi() {
        return Err(QmlError::Domain(format!(
            "band {j} reaches |xi2| = {reach}, beyond the tabulated range [{lo}, {hi}]"
        )));
    }
    if opts.pair_points < 1 || !(opts.pair_window > 0.0 && opts.pair_window < g.half_width) {
        return Err(QmlError::Domain("pair window must be positive and inside the grid".into()));
    }
    let ks: Vec<usize> = (0..nk).filter(|&k| band_weight_sq(part, j, table.xi(k)) > 0.0).collect();
    // Nearest grid indices for the sampled x2 and z2.
    let ys: Vec<usize> = (0..opts.pair_points)
        .map(|i| {
            let y = if opts.pair_points == 1 {
                0.0
            } else {
                -opts.pair_window + 2.0 * opts.pair_window * i as f64 / (opts.pair_points - 1) as f64
            };
            ((y + g.half_width) / g.dx()).round() as usize
        })
        .collect();
    let limit = 2.0 * PI / opts.points_per_period;
    let dxi = g.dxi();
    let scale = dxi / (2.0 * PI * h);
    let pairs: Vec<(usize, usize)> = ys.iter().flat_map(|&x| ys.iter().map(move |&z| (x, z))).collect();
    let vals: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(ix, iz)| {
            let z2 = g.x(iz);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut prev: Option<(usize, f64)> = None;
            for &k in &ks {
                let xi = table.xi(k);
                let d = table.phase_row(ti, k)[ix] - z2 * xi;
                if let Some((kp, dp)) = prev {
                    if kp + 1 == k && (d - dp).abs() / h > limit {
                        return Err(QmlError::UnderResolved(format!(
                            "phase advances {:.3} rad per node, above {limit:.3}",
                            (d - dp).abs() / h
                        )));
                    }
                }
                prev = Some((k, d));
                acc += Complex64::from_polar(band_weight_sq(part, j, xi) * table.amp_row(ti, k)[ix], d / h);
            }
            Ok(acc.norm() * scale)
        })
        .collect();
    let mut best: f64 = 0.0;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeFit {
    pub regime: Regime,
    /// `sqrt(max * min)` of `sup / bound` over the nonzero samples.
    pub constant: f64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub samples: usize,
}

impl RegimeFit {
    /// Every nonzero sample lies in `[C / 2, 2 C]`.
    pub fn within_factor_two(&self) -> bool {
        self.max_ratio <= 4.0 * self.min_ratio
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelBoundReport {
    pub small: RegimeFit,
    pub large: RegimeFit,
    pub pass: bool,
    /// `(sample index, ratio / C)` for samples above `2 C`.
    pub violations: Vec<(usize, f64)>,
}

/// Fits one constant per regime; passes when every nonzero sample is within a factor two of it.
///
/// Zero samples (disjoint wavelet supports) satisfy any bound and are left out of the fit.
pub fn kernel_bound_check(samples: &[KernelSample], q: &ExponentQuery) -> Result<KernelBoundReport> {
    let mut ratios = Vec::with_capacity(samples.len());
    for s in samples {
        if s.k != q.k {
            return Err(QmlError::Domain(format!("sample has k = {}, query has k = {}", s.k, q.k)));
        }
        if !(s.sup.is_finite() && s.sup >= 0.0) {
            return Err(QmlError::Domain(format!("sample value {} is not a finite magnitude", s.sup)));
        }
        if s.regime != regime_of(s.h, s.k, s.j, s.t) {
            return Err(QmlError::Domain(format!("sample at t = {} carries the wrong regime", s.t)));
        }
        ratios.push(s.sup / regime_bound(s.h, s.k, s.j, s.a, s.t));
    }
    let fit = |regime: Regime| -> Result<RegimeFit> {
        let rs: Vec<f64> =
            samples.iter().zip(&ratios).filter(|(s, _)| s.regime == regime).map(|(_, &r)| r).collect();
        let pos: Vec<f64> = rs.iter().copied().filter(|&r| r > 0.0).collect();
        if pos.is_empty() {
            return Err(QmlError::Inconclusive(format!("no nonzero samples in the {} regime", regime.name())));
        }
        let max_ratio = pos.iter().copied().fold(0.0, f64::max);
        let min_ratio = pos.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(RegimeFit { regime, constant: (max_ratio * min_ratio).sqrt(), max_ratio, min_ratio, samples: rs.len() })
    };
    let small = fit(Regime::SmallSep)?;
    let large = fit(Regime::LargeSep)?;
    let violations: Vec<(usize, f64)> = samples
        .iter()
        .zip(&ratios)
        .enumerate()
        .filter_map(|(i, (s, &r))| {
            let c = if s.regime == Regime::SmallSep { small.constant } else { large.constant };
            (r > 2.0 * c).then_some((i, r / c))
        })
        .collect();
    let pass = small.within_factor_two() && large.within_factor_two();
    Ok(KernelBoundReport { small, large, pass, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::Lebesgue;
    use crate::grid::GridSpec;
    use crate::propagator::{phase_table_with, PhaseOptions};
    use crate::symbols::SymbolSpec;

    fn q1() -> ExponentQuery {
        ExponentQuery::new(Lebesgue::Infinity, 1, 0).unwrap()
    }

    /// Coefficients of `p(u + s)` from those of `p(u)`.
    fn shift_poly(p: &[f64], s: f64) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        for (n, &c) in p.iter().enumerate() {
            let mut binom = 1.0;
            for m in 0..=n {
                out[m] += c * binom * s.powi((n - m) as i32);
                binom = binom * (n - m) as f64 / (m + 1) as f64;
            }
        }
        out
    }

    #[test]
    fn overlap_matches_exact_polynomial_integral() {
        let w = WaveletSpec::poly_bump();
        let c = (2027025.0f64 / 92160.0).sqrt();
        let f = [0.0, c, 0.0, -3.0 * c, 0.0, 3.0 * c, 0.0, -c];
        for &s in &[0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.7] {
            let g = shift_poly(&f, s);
            let mut prod = vec![0.0; f.len() + g.len() - 1];
            for (i, a) in f.iter().enumerate() {
                for (k, b) in g.iter().enumerate() {
                    prod[i + k] += a * b;
                }
            }
            let anti = |u: f64| prod.iter().enumerate().map(|(n, c)| c * u.powi(n as i32 + 1) / (n + 1) as f64).sum::<f64>();
            let exact = anti(1.0 - s) - anti(-1.0);
            assert!((wavelet_overlap(&w, s) - exact).abs() < 1e-10, "{s}");
            assert!((wavelet_overlap(&w, -s) - exact).abs() < 1e-10, "{s}");
        }
        assert!((wavelet_overlap(&w, 0.0) - 1.0).abs() < 1e-12);
        assert_eq!(wavelet_overlap(&w, 2.0), 0.0);
    }

    #[test]
    fn disjoint_supports_give_zero() {
        let part = DyadicPartition::new(1.0 / 64.0, 1).unwrap();
        let w = WaveletSpec::poly_bump();
        let s = kernel_sample(KernelPhase::Flat(GraphFn::Free), &w, &part, 2, 0.2, 0.45).unwrap();
        assert_eq!(s.sup, 0.0);
        assert_eq!(s.regime, Regime::LargeSep);
    }

    #[test]
    fn zero_separation_is_support_measure() {
        // At t = 0 the xi2 integrand is nonnegative, so the supremum sits at x2 = z2.
        let w = WaveletSpec::poly_bump();
        let mut ratios = Vec::new();
        for &h in &[1.0 / 64.0, 1.0 / 256.0] {
            let part = DyadicPartition::new(h, 1).unwrap();
            let a = 0.5;
            let n = 20000;
            let ds = 1.5 / n as f64;
            let mut simpson = 0.0;
            for i in 0..=n {
                let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                simpson += wgt * DyadicPartition::chi0(i as f64 * ds).powi(2);
            }
            let measure = 2.0 * simpson * ds / 3.0 * part.unit();
            let oracle = a * measure / (2.0 * PI * h);
            let s = kernel_sample(KernelPhase::Flat(GraphFn::Free), &w, &part, 0, a, 0.0).unwrap();
            assert!((s.sup - oracle).abs() < 1e-6 * oracle, "{} {oracle}", s.sup);
            ratios.push(s.sup / regime_bound(h, 1, 0, a, 0.0));
        }
        // For k = 1 the support measure scales exactly like the small-separation bound.
        assert!((ratios[0] - ratios[1]).abs() < 1e-6 * ratios[0]);
    }

    #[test]
    fn stationary_phase_scale() {
        // Past the threshold the xi2 integral behaves like (2 pi h t)^(-1/2) at a stationary point.
        let w = WaveletSpec::poly_bump();
        let h = 1.0 / 256.0;
        let part = DyadicPartition::new(h, 1).unwrap();
        let (j, a) = (4, 0.5);
        for &t in &[0.05, 0.1, 0.12] {
            let s = kernel_sample(KernelPhase::Flat(GraphFn::Free), &w, &part, j, a, t).unwrap();
            let sp = a * wavelet_overlap(&w, t / a) / (2.0 * PI * h * t).sqrt();
            let r = s.sup / sp;
            assert!((0.8..1.2).contains(&r), "t = {t}: {r}");
        }
    }

    #[test]
    fn table_path_matches_flat_path() {
        let h = 1.0 / 32.0;
        let part = DyadicPartition::new(h, 1).unwrap();
        let w = WaveletSpec::poly_bump();
        // Lattice spacing pi h / 8 puts about 40 nodes across the j = 0 band.
        let grid = GridSpec::new(8.0, 256, h).unwrap();
        let opts = PhaseOptions { xi_cut: Some(1.2), ..PhaseOptions::default() };
        let table = phase_table_with(&SymbolSpec::GraphSymbol(GraphFn::Free), grid, &[0.0, 0.05], opts).unwrap();
        for &(j, t) in &[(0u32, 0.0), (0, 0.05), (1, 0.05)] {
            let flat = kernel_sample(KernelPhase::Flat(GraphFn::Free), &w, &part, j, 0.5, t).unwrap();
            let ko = KernelOptions { pair_window: 0.1, pair_points: 17, ..KernelOptions::default() };
            let tab = kernel_sample_with(KernelPhase::Table(&table), &w, &part, j, 0.5, t, ko).unwrap();
            assert!(tab.sup <= flat.sup * (1.0 + 1e-6), "j={j} t={t}: {} {}", tab.sup, flat.sup);
            assert!(tab.sup >= 0.9 * flat.sup, "j={j} t={t}: {} {}", tab.sup, flat.sup);
        }
    }

    #[test]
    fn refusals() {
        let part = DyadicPartition::new(1.0 / 64.0, 1).unwrap();
        let w = WaveletSpec::poly_bump();
        let flat = || KernelPhase::Flat(GraphFn::Free);
        assert!(kernel_sample(flat(), &w, &part, 0, 0.5, 1.5).is_err());
        assert!(kernel_sample(flat(), &w, &part, 0, -0.5, 0.1).is_err());
        let coarse = KernelOptions { points_per_period: 4.0, ..KernelOptions::default() };
        assert!(matches!(
            kernel_sample_with(flat(), &w, &part, 0, 0.5, 0.1, coarse),
            Err(QmlError::UnderResolved(_))
        ));
        assert!(kernel_sample(KernelPhase::Flat(GraphFn::CircleGraph), &w, &part, 4, 0.5, 0.1).is_err());
        assert!(kernel_sample(KernelPhase::Flat(GraphFn::Dilation), &w, &part, 0, 0.5, 0.1).is_err());
    }

    #[test]
    fn table_path_refuses_coarse_lattice() {
        let h = 1.0 / 32.0;
        let part = DyadicPartition::new(h, 1).unwrap();
        let w = WaveletSpec::poly_bump();
        // Lattice spacing pi h / L with L = 4 leaves pairs 1.5 apart at ~1.2 rad per node.
        let grid = GridSpec::new(4.0, 256, h).unwrap();
        let opts = PhaseOptions { xi_cut: Some(0.5), ..PhaseOptions::default() };
        let table = phase_table_with(&SymbolSpec::GraphSymbol(GraphFn::Free), grid, &[0.0], opts).unwrap();
        let ko = KernelOptions { pair_window: 0.75, pair_points: 5, ..KernelOptions::default() };
        let r = kernel_sample_with(KernelPhase::Table(&table), &w, &part, 0, 0.5, 0.0, ko);
        assert!(matches!(r, Err(QmlError::UnderResolved(_))), "{r:?}");
    }

    fn synthetic(h: f64, j: u32, a: f64, t: f64, factor: f64) -> KernelSample {
        KernelSample { h, k: 1, j, a, t, sup: factor * regime_bound(h, 1, j, a, t), regime: regime_of(h, 1, j, t) }
    }

    #[test]
    fn exact_bound_samples_fit_unit_constant() {
        let h = 1.0 / 64.0;
        let s: Vec<KernelSample> = [(0, 0.1), (2, 0.01), (2, 0.2), (4, 0.1), (4, 0.3)]
            .iter()
            .map(|&(j, t)| synthetic(h, j, 0.5, t, 1.0))
            .collect();
        let r = kernel_bound_check(&s, &q1()).unwrap();
        assert!(r.pass);
        assert!((r.small.constant - 1.0).abs() < 1e-12 && (r.large.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adversarial_sample_is_flagged() {
        let h = 1.0 / 64.0;
        let mut s: Vec<KernelSample> = [(0, 0.1), (2, 0.01), (2, 0.2), (4, 0.1), (4, 0.3)]
            .iter()
            .map(|&(j, t)| synthetic(h, j, 0.5, t, 1.0))
            .collect();
        s.push(synthetic(h, 4, 0.5, 0.2, 10.0));
        let r = kernel_bound_check(&s, &q1()).unwrap();
        assert!(!r.pass);
        assert!(!r.large.within_factor_two() && r.small.within_factor_two());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].0, 5);
        // A sample far below the bound also breaks the factor-two band.
        let mut low = s[..5].to_vec();
        low.push(synthetic(h, 4, 0.5, 0.2, 0.1));
        assert!(!kernel_bound_check(&low, &q1()).unwrap().pass);
        let mut zero = s[..5].to_vec();
        zero.push(synthetic(h, 4, 0.5, 0.2, 0.0));
        assert!(kernel_bound_check(&zero, &q1()).unwrap().pass);
    }

    #[test]
    fn empty_regime_is_inconclusive() {
        let h = 1.0 / 64.0;
        let s = vec![synthetic(h, 0, 0.5, 0.1, 1.0), synthetic(h, 0, 0.5, 0.3, 1.0)];
        assert!(matches!(kernel_bound_check(&s, &q1()), Err(QmlError::Inconclusive(_))));
        let mut bad = synthetic(h, 4, 0.5, 0.3, 1.0);
        bad.regime = Regime::SmallSep;
        assert!(kernel_bound_check(&[bad], &q1()).is_err());
    }
}
