//! Sweep execution, assertion evaluation and reports.

use crate::config::{Assertion, Check, Expected, Exponent, ExperimentConfig, Filter};
use qml::estimates::{
    delta_p_k, fit_power_law, kernel_bound_check, kernel_query, regime_bound, run_sweep, sogge_delta, sweep_csv, to_f64,
    KernelSample, Lebesgue, Measurement, Regime, SweepRow,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionResult {
    pub description: String,
    pub pass: bool,
    pub measured: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedExponent {
    pub series: String,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub config_text: String,
    pub rows: Vec<SweepRow>,
    pub csv: String,
    pub fits: Vec<FittedExponent>,
    pub assertions: Vec<AssertionResult>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            EXIT_OK
        } else {
            EXIT_ASSERTION
        }
    }

    /// Markdown summary; everything above the timings section is deterministic.
    pub fn markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}\n", self.name);
        let _ = writeln!(s, "## Configuration\n\n```text\n{}\n```\n", self.config_text.trim_end());
        let _ = writeln!(s, "## Measurements\n\n| h | p | k | j | alpha | quantity | value |\n|---|---|---|---|---|---|---|");
        for r in &self.rows {
            for m in &r.measurements {
                let o = |v: Option<String>| v.unwrap_or_default();
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} | {} |",
                    r.h,
                    o(m.p.map(|p| p.to_string())),
                    o(m.k.map(|v| v.to_string())),
                    o(m.j.map(|v| v.to_string())),
                    o(m.alpha.map(|v| v.to_string())),
                    m.label(),
                    m.value
                );
            }
            if let Some((stage, why)) = &r.refused {
                let _ = writeln!(s, "| {} | | | | | refused[{stage}] | {} |", r.h, why.replace('|', "/"));
            }
        }
        let _ = writeln!(s, "\n## Fitted exponents\n\n| series | slope | intercept | residual | points |\n|---|---|---|---|---|");
        for f in &self.fits {
            let _ = writeln!(s, "| {} | {:.4} | {:.4} | {:.2e} | {} |", f.series, f.slope, f.intercept, f.residual, f.points);
        }
        let _ = writeln!(s, "\n## Assertions\n\n| assertion | measured | result |\n|---|---|---|");
        for a in &self.assertions {
            let _ = writeln!(s, "| {} | {} | {} |", a.description, a.measured, if a.pass { "PASS" } else { "FAIL" });
        }
        if self.assertions.is_empty() {
            let _ = writeln!(s, "| (none) | | |");
        }
        let timed: Vec<&SweepRow> = self.rows.iter().filter(|r| !r.timings.is_empty()).collect();
        if !timed.is_empty() {
            let _ = writeln!(s, "\n## Timings\n\n| h | stage | seconds |\n|---|---|---|");
            for r in timed {
                for (stage, t) in &r.timings {
                    let _ = writeln!(s, "| {} | {stage} | {t:.3} |", r.h);
                }
            }
        }
        s
    }

    /// Writes the CSV and markdown under `root`; returns both paths.
    pub fn write(&self, root: &Path, csv: &Path, report: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        let (c, r) = (root.join(csv), root.join(report));
        for p in [&c, &r] {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(&c, &self.csv)?;
        std::fs::write(&r, self.markdown())?;
        Ok((c, r))
    }
}

/// Runs the sweep on the current rayon pool and evaluates every assertion.
pub fn run(config: &ExperimentConfig) -> RunReport {
    let rows = run_sweep(&config.experiment(), &config.h_list);
    report_from_rows(config, rows)
}

/// Runs on a dedicated pool of `threads` workers.
pub fn run_with_threads(config: &ExperimentConfig, threads: usize) -> Result<RunReport, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    Ok(pool.install(|| run(config)))
}

pub fn report_from_rows(config: &ExperimentConfig, rows: Vec<SweepRow>) -> RunReport {
    let assertions = config.assertions.iter().map(|a| evaluate(a, &rows)).collect();
    RunReport {
        name: config.name.clone(),
        config_text: config.text.clone(),
        csv: sweep_csv(&config.name, &rows),
        fits: fit_all(&rows),
        assertions,
        rows,
    }
}

fn series_key(m: &Measurement) -> String {
    let mut key = m.label();
    for (name, v) in [("p", m.p.map(|p| p.to_string())), ("k", m.k.map(|v| v.to_string())), ("j", m.j.map(|v| v.to_string())), ("alpha", m.alpha.map(|v| v.to_string()))] {
        if let Some(v) = v {
            let _ = write!(key, " {name}={v}");
        }
    }
    key
}

/// Power-law fits of every series present at three or more distinct `h`.
fn fit_all(rows: &[SweepRow]) -> Vec<FittedExponent> {
    let mut by_key: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        for m in &r.measurements {
            by_key.entry(series_key(m)).or_default().push((r.h, m.value));
        }
    }
    by_key
        .into_iter()
        .filter_map(|(series, pts)| {
            let f = fit_power_law(&series, &pts).ok()?;
            Some(FittedExponent { series, slope: f.slope, intercept: f.intercept, residual: f.residual, points: pts.len() })
        })
        .collect()
}

fn matches(f: &Filter, quantity: &str, m: &Measurement) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
    m.quantity == quantity
        && f.p.is_none_or(|p| m.p.is_none_or(|mp| mp == p))
        && f.k.is_none_or(|k| m.k.is_none_or(|mk| mk == k))
        && f.j.is_none_or(|j| m.j.is_none_or(|mj| mj == j))
        && f.alpha.is_none_or(|a| m.alpha.is_none_or(|ma| close(ma, a)))
        && f.params.iter().all(|(key, v)| m.get(key).is_none_or(|mv| close(mv, *v)))
}

fn describe(a: &Assertion) -> String {
    let f = &a.filter;
    let mut coords = Vec::new();
    if let Some(p) = f.p {
        coords.push(format!("p={p}"));
    }
    for (name, v) in [("k", f.k), ("j", f.j)] {
        if let Some(v) = v {
            coords.push(format!("{name}={v}"));
        }
    }
    if let Some(al) = f.alpha {
        coords.push(format!("alpha={al}"));
    }
    coords.extend(f.params.iter().map(|(k, v)| format!("{k}={v}")));
    let what = match &a.check {
        Check::Slope { expected, tolerance } => {
            let e = match expected {
                Expected::Value(v) => v.to_string(),
                Expected::Named { negate, exponent } => {
                    let n = match exponent {
                        Exponent::DeltaPK => "delta_p_k",
                        Exponent::SoggeDelta => "sogge_delta",
                        Exponent::TalphaInf => "talpha_inf",
                    };
                    format!("{}{n}", if *negate { "-" } else { "" })
                }
            };
            format!("slope = {e} ± {tolerance}")
        }
        Check::Spread { max } => format!("spread <= {max}"),
        Check::Kernel => "one constant per regime within factor 2".into(),
        Check::Contact => "contact order = k".into(),
        Check::Coefficients { max } => format!("worst ratio <= {max} C"),
    };
    if coords.is_empty() {
        format!("{}: {what}", a.quantity)
    } else {
        format!("{}[{}]: {what}", a.quantity, coords.join(","))
    }
}

fn expected_value(e: Expected, f: &Filter) -> Result<f64, String> {
    let (negate, exponent) = match e {
        Expected::Value(v) => return Ok(v),
        Expected::Named { negate, exponent } => (negate, exponent),
    };
    let v = match exponent {
        Exponent::DeltaPK => {
            let (p, k) = (f.p.ok_or("delta_p_k needs p")?, f.k.ok_or("delta_p_k needs k")?);
            to_f64(delta_p_k(p, k).map_err(|e| e.to_string())?)
        }
        Exponent::SoggeDelta => to_f64(sogge_delta(f.p.ok_or("sogge_delta needs p")?).map_err(|e| e.to_string())?),
        Exponent::TalphaInf => 0.5 - f.alpha.ok_or("talpha_inf needs alpha")? / 2.0,
    };
    Ok(if negate { -v } else { v })
}

fn fail(description: String, measured: impl Into<String>) -> AssertionResult {
    AssertionResult { description, pass: false, measured: measured.into() }
}

pub fn evaluate(a: &Assertion, rows: &[SweepRow]) -> AssertionResult {
    let description = describe(a);
    let picked: Vec<(f64, &Measurement)> = rows
        .iter()
        .flat_map(|r| r.measurements.iter().map(move |m| (r.h, m)))
        .filter(|(_, m)| match a.check {
            Check::Coefficients { .. } => m.quantity.starts_with("coeff_worst") && matches(&a.filter, &m.quantity, m),
            _ => matches(&a.filter, &a.quantity, m),
        })
        .collect();
    if picked.is_empty() {
        return fail(description, "no matching measurements");
    }
    match &a.check {
        Check::Slope { expected, tolerance } => {
            let want = match expected_value(*expected, &a.filter) {
                Ok(v) => v,
                Err(e) => return fail(description, e),
            };
            let pts: Vec<(f64, f64)> = picked.iter().map(|(h, m)| (*h, m.value)).collect();
            match fit_power_law(&a.quantity, &pts) {
                Ok(fit) => AssertionResult {
                    pass: (fit.slope - want).abs() <= *tolerance,
                    measured: format!("{:.4} (expected {want:.4})", fit.slope),
                    description,
                },
                Err(e) => fail(description, e.to_string()),
            }
        }
        Check::Spread { max } => {
            let vals: Vec<f64> = picked.iter().map(|(_, m)| m.value.abs()).collect();
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let spread = hi / lo;
            AssertionResult { pass: spread.is_finite() && spread <= *max, measured: format!("{spread:.3}"), description }
        }
        Check::Kernel => kernel_assertion(description, &picked),
        Check::Contact => {
            let bad: Vec<String> = picked
                .iter()
                .filter(|(_, m)| m.k.is_none_or(|k| m.value != k as f64))
                .map(|(_, m)| format!("{}={}", m.label(), m.value))
                .collect();
            let measured = if bad.is_empty() { format!("{} orders match", picked.len()) } else { bad.join(", ") };
            AssertionResult { pass: bad.is_empty(), measured, description }
        }
        Check::Coefficients { max } => {
            let worst = picked.iter().map(|(_, m)| m.value).fold(f64::NEG_INFINITY, f64::max);
            AssertionResult { pass: worst.is_finite() && worst <= *max, measured: format!("{worst:.3}"), description }
        }
    }
}

/// Rebuilds kernel samples from `sup / bound` ratios and applies the regime check per `k`.
fn kernel_assertion(description: String, picked: &[(f64, &Measurement)]) -> AssertionResult {
    let mut by_k: BTreeMap<u32, Vec<KernelSample>> = BTreeMap::new();
    for (h, m) in picked {
        let (Some(k), Some(j), Some(a), Some(t), Some(large)) = (m.k, m.j, m.get("a"), m.get("t"), m.get("large")) else {
            return fail(description, format!("malformed kernel row {}", m.label()));
        };
        let regime = if large == 1.0 { Regime::LargeSep } else { Regime::SmallSep };
        let sup = m.value * regime_bound(*h, k, j, a, t);
        by_k.entry(k).or_default().push(KernelSample { h: *h, k, j, a, t, sup, regime });
    }
    let mut measured = Vec::new();
    let mut pass = true;
    for (k, samples) in by_k {
        let q = match kernel_query(k) {
            Ok(q) => q,
            Err(e) => return fail(description, e.to_string()),
        };
        match kernel_bound_check(&samples, &q) {
            Ok(r) => {
                pass &= r.pass;
                for fit in [r.small, r.large] {
                    measured.push(format!(
                        "k={k} {}: C={:.3}, spread {:.2}",
                        fit.regime.name(),
                        fit.constant,
                        fit.max_ratio / fit.min_ratio
                    ));
                }
            }
            Err(e) => return fail(description, e.to_string()),
        }
    }
    AssertionResult { pass, measured: measured.join("; "), description }
}

/// Parses a measurement CSV back into rows; refusal reasons are not stored in CSVs.
pub fn parse_sweep_csv(text: &str) -> Result<(String, Vec<SweepRow>), String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == qml::estimates::CSV_HEADER => {}
        _ => return Err("missing CSV header".into()),
    }
    let mut name: Option<String> = None;
    let mut rows: Vec<SweepRow> = Vec::new();
    for (i, line) in lines {
        let at = |msg: String| format!("line {}: {msg}", i + 1);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(at(format!("expected 8 columns, found {}", cols.len())));
        }
        match &name {
            Some(n) if n != cols[0] => return Err(at("mixed experiment names".into())),
            None => name = Some(cols[0].to_string()),
            _ => {}
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| at(format!("bad number '{s}'")));
        let h = num(cols[1])?;
        if !(h > 0.0 && h <= 1.0) {
            return Err(at(format!("h = {h} is out of range")));
        }
        let idx = match rows.iter().position(|r| r.h == h) {
            Some(i) => i,
            None => {
                rows.push(SweepRow { h, measurements: Vec::new(), refused: None, timings: Vec::new() });
                rows.len() - 1
            }
        };
        let (quantity, params) = split_label(cols[6]).map_err(at)?;
        if quantity == "refused" {
            let stage = params.into_iter().next().map(|(k, _)| k).unwrap_or_default();
            rows[idx].refused = Some((stage, String::new()));
            continue;
        }
        let mut m = Measurement::new(&quantity, num(cols[7])?);
        let opt_u32 = |s: &str| -> Result<Option<u32>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| at(format!("bad integer '{s}'")))
            }
        };
        m.p = if cols[2].is_empty() { None } else { Some(cols[2].parse::<Lebesgue>().map_err(|e| at(e.to_string()))?) };
        m.k = opt_u32(cols[3])?;
        m.j = opt_u32(cols[4])?;
        m.alpha = if cols[5].is_empty() { None } else { Some(num(cols[5])?) };
        for (k, v) in params {
            let v = v.ok_or_else(|| at(format!("parameter '{k}' has no value")))?;
            m = m.param(&k, v);
        }
        rows[idx].measurements.push(m);
    }
    Ok((name.unwrap_or_default(), rows))
}

type Params = Vec<(String, Option<f64>)>;

/// `name[key=v;key=v]` into its parts; `refused[stage]` yields a bare key.
fn split_label(s: &str) -> Result<(String, Params), String> {
    let Some((name, rest)) = s.split_once('[') else {
        return Ok((s.to_string(), Vec::new()));
    };
    let inner = rest.strip_suffix(']').ok_or_else(|| format!("unterminated label '{s}'"))?;
    let mut params = Vec::new();
    for part in inner.split(';') {
        match part.split_once('=') {
            Some((k, v)) => params.push((k.to_string(), Some(v.parse::<f64>().map_err(|_| format!("bad value in '{s}'"))?))),
            None => params.push((part.to_string(), None)),
        }
    }
    Ok((name.to_string(), params))
}
