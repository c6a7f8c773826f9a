//! Line-based experiment configuration.
//!
//! ```text
//! name = tube_k1
//! h_list = 2^-5, 2^-6, 2^-7
//!
//! [grid]            # optional; omitted means a per-h default grid
//! half_width = 12.566
//! n = 256
//!
//! [stage]
//! kind = construct
//! source = t_alpha
//! alpha = alpha_k(1)
//!
//! [stage]
//! kind = norm
//! p = 6, 8, inf
//!
//! [assert]
//! kind = slope
//! quantity = lp_norm
//! p = 8
//! k = 1
//! expected = -delta_p_k
//! tolerance = 0.05
//!
//! [output]
//! root = out
//! ```
//!
//! `#` starts a comment. Every error is collected with its line number.

use qml::estimates::{alpha_k, check_chain, to_f64, Experiment, GridChoice, HValue, Lebesgue, Source, Stage};
use qml::symbols::{parse_graph_fn, parse_symbol_expr};
use qml::wavelets::SCALES_PER_DECADE;
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Component, Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based; 0 for whole-file errors.
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigErrors {}

/// Named exponent an assertion compares a fitted slope against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    DeltaPK,
    SoggeDelta,
    /// `1/2 - alpha/2`, the sup-norm growth of the tube construction.
    TalphaInf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    Value(f64),
    Named { negate: bool, exponent: Exponent },
}

/// Restricts an assertion to matching measurements. A coordinate constrains only
/// measurements that carry it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Filter {
    pub p: Option<Lebesgue>,
    pub k: Option<u32>,
    pub j: Option<u32>,
    pub alpha: Option<f64>,
    pub params: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// Fitted log-log slope within `tolerance` of `expected`.
    Slope { expected: Expected, tolerance: f64 },
    /// Largest over smallest value across the sweep at most `max`.
    Spread { max: f64 },
    /// Dyadic kernel samples fit one constant per regime.
    Kernel,
    /// Every measured contact order equals its `k`.
    Contact,
    /// Coefficient norms stay within `max` times the fitted constant.
    Coefficients { max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub line: usize,
    pub quantity: String,
    pub filter: Filter,
    pub check: Check,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub h_list: Vec<f64>,
    pub seed: u64,
    pub grid: GridChoice,
    pub stages: Vec<Stage>,
    pub assertions: Vec<Assertion>,
    pub root: PathBuf,
    pub csv: PathBuf,
    pub report: PathBuf,
    /// Source text, echoed into reports.
    pub text: String,
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Experiment {
        Experiment { name: self.name.clone(), grid: self.grid, stages: self.stages.clone() }
    }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 4] = ["grid", "stage", "assert", "output"];

fn split_sections(text: &str, errs: &mut Vec<ConfigError>) -> Vec<Section> {
    let mut out = vec![Section { name: String::new(), line: 0, entries: Vec::new() }];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(inner) = body.strip_prefix('[') {
            match inner.strip_suffix(']').map(str::trim) {
                Some(name) if SECTIONS.contains(&name) => out.push(Section { name: name.into(), line, entries: Vec::new() }),
                Some(name) => errs.push(ConfigError { line, msg: format!("unknown section [{name}]") }),
                None => errs.push(ConfigError { line, msg: "unterminated section header".into() }),
            }
            continue;
        }
        match body.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                let sec = out.last_mut().expect("top-level section");
                let key = k.trim().to_string();
                if sec.entries.iter().any(|e| e.key == key) {
                    errs.push(ConfigError { line, msg: format!("duplicate key '{key}'") });
                } else {
                    sec.entries.push(Entry { line, key, value: v.trim().to_string() });
                }
            }
            _ => errs.push(ConfigError { line, msg: format!("expected 'key = value', got '{body}'") }),
        }
    }
    out
}

/// Decimal, `a/b` or `b^e`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = if let Some((b, e)) = s.split_once('^') {
        parse_plain(b)?.powf(parse_plain(e)?)
    } else if let Some((a, b)) = s.split_once('/') {
        parse_plain(a)? / parse_plain(b)?
    } else {
        parse_plain(s)?
    };
    v.is_finite().then_some(v)
}

fn parse_plain(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit() || b".eE+-".contains(&c)) {
        return None;
    }
    s.parse().ok()
}

fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty()).collect()
}

/// Key lookup over one section, recording errors against the right lines.
struct Reader<'a> {
    sec: &'a Section,
    used: BTreeSet<&'a str>,
    errs: &'a mut Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn new(sec: &'a Section, errs: &'a mut Vec<ConfigError>) -> Self {
        Reader { sec, used: BTreeSet::new(), errs }
    }

    fn raw(&mut self, key: &'a str) -> Option<(&'a str, usize)> {
        self.used.insert(key);
        self.sec.entries.iter().find(|e| e.key == key).map(|e| (e.value.as_str(), e.line))
    }

    fn fail(&mut self, line: usize, msg: String) {
        self.errs.push(ConfigError { line, msg });
    }

    fn missing(&mut self, key: &str) {
        let what = if self.sec.name.is_empty() { "configuration".to_string() } else { format!("[{}]", self.sec.name) };
        let line = self.sec.line;
        self.fail(line, format!("{what} requires '{key}'"));
    }

    fn typed<T>(&mut self, key: &'a str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let (v, line) = self.raw(key)?;
        let r = parse(v);
        if r.is_none() {
            self.fail(line, format!("'{key}' expects {what}, got '{v}'"));
        }
        r
    }

    fn required<T>(&mut self, key: &'a str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        if self.raw(key).is_none() {
            self.missing(key);
            return None;
        }
        self.typed(key, what, parse)
    }

    fn checked<T>(&mut self, key: &'a str, what: &str, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        let (v, line) = self.raw(key)?;
        match parse(v) {
            Ok(t) => Some(t),
            Err(e) => {
                self.fail(line, format!("'{key}' expects {what}: {e}"));
                None
            }
        }
    }

    fn number(&mut self, key: &'a str) -> Option<f64> {
        self.typed(key, "a number", parse_number)
    }

    fn order(&mut self, key: &'a str) -> Option<u32> {
        self.typed(key, "a non-negative integer", |s| s.trim().parse().ok())
    }

    fn orders(&mut self, key: &'a str) -> Option<Vec<u32>> {
        self.typed(key, "a list of non-negative integers", |s| {
            let v: Option<Vec<u32>> = list(s).into_iter().map(|x| x.parse().ok()).collect();
            v.filter(|v| !v.is_empty())
        })
    }

    fn numbers(&mut self, key: &'a str) -> Option<Vec<f64>> {
        self.typed(key, "a list of numbers", |s| {
            let v: Option<Vec<f64>> = list(s).into_iter().map(parse_number).collect();
            v.filter(|v| !v.is_empty())
        })
    }

    fn flag(&mut self, key: &'a str) -> Option<bool> {
        self.typed(key, "true or false", |s| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    /// Rejects keys never looked up.
    fn finish(self) {
        for e in &self.sec.entries {
            if !self.used.contains(e.key.as_str()) {
                let what = if self.sec.name.is_empty() { "top level".to_string() } else { format!("[{}]", self.sec.name) };
                self.errs.push(ConfigError { line: e.line, msg: format!("unknown key '{}' in {what}", e.key) });
            }
        }
    }
}

fn parse_alpha(s: &str) -> Option<f64> {
    if let Some(k) = s.strip_prefix("alpha_k(").and_then(|r| r.strip_suffix(')')) {
        let k: u32 = k.trim().parse().ok()?;
        return (k >= 1).then(|| to_f64(alpha_k(k)));
    }
    parse_number(s)
}

fn parse_hvalue(s: &str) -> Option<HValue> {
    match s.trim().strip_prefix("h^") {
        Some(e) => parse_plain(e).map(HValue::HPow),
        None => parse_number(s).map(HValue::Const),
    }
}

fn parse_powers(s: &str) -> Option<Vec<(u32, u32)>> {
    let v: Option<Vec<(u32, u32)>> = list(s)
        .into_iter()
        .map(|pair| {
            let (a, b) = pair.split_once(':')?;
            Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
        })
        .collect();
    v.filter(|v| !v.is_empty())
}

fn parse_lebesgue_list(s: &str) -> Result<Vec<Lebesgue>, String> {
    let v = list(s).into_iter().map(|x| x.parse::<Lebesgue>().map_err(|e| e.to_string())).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("empty list".into());
    }
    Ok(v)
}

fn parse_stage(sec: &Section, errs: &mut Vec<ConfigError>) -> Option<Stage> {
    let mut r = Reader::new(sec, errs);
    let kind = r.required("kind", "a stage kind", |s| Some(s.to_string()));
    let stage = match kind.as_deref() {
        Some("construct") => {
            let source = r.required("source", "t_alpha or flat_model", |s| match s {
                "t_alpha" | "flat_model" => Some(s.to_string()),
                _ => None,
            });
            match source.as_deref() {
                Some("t_alpha") => {
                    let alpha = r.required("alpha", "a number or alpha_k(k)", parse_alpha);
                    let smoothed_edges = r.flag("smoothed_edges").unwrap_or(false);
                    alpha.map(|alpha| Stage::Construct(Source::TAlpha { alpha, smoothed_edges }))
                }
                Some(_) => {
                    let k = r.required("k", "a positive integer", |s| s.parse().ok().filter(|&k: &u32| k >= 1));
                    let sigma1 = r.number("sigma1").unwrap_or(0.3);
                    let spread = r.number("spread").unwrap_or(0.5);
                    k.map(|k| Stage::Construct(Source::FlatModel { k, sigma1, spread }))
                }
                None => None,
            }
        }
        Some("propagate") => {
            let symbol = if r.raw("symbol").is_none() {
                r.missing("symbol");
                None
            } else {
                r.checked("symbol", "a symbol expression", |s| parse_symbol_expr(s).map_err(|e| e.to_string()))
            };
            let x1_max = r.required("x1_max", "a number", parse_number);
            let xi_cut = r.number("xi_cut");
            match (symbol, x1_max) {
                (Some(symbol), Some(x1_max)) => Some(Stage::Propagate { symbol, x1_max, xi_cut }),
                _ => None,
            }
        }
        Some("cwt") => {
            let per_decade = r.order("per_decade").unwrap_or(SCALES_PER_DECADE);
            Some(Stage::Cwt { per_decade })
        }
        Some("norm") => {
            if r.raw("p").is_none() {
                r.missing("p");
            }
            r.checked("p", "a list of exponents", parse_lebesgue_list).map(|ps| Stage::LpNorm { ps })
        }
        Some("defect") => {
            let mut sym = |key| {
                if r.raw(key).is_none() {
                    r.missing(key);
                    return None;
                }
                r.checked(key, "a symbol expression", |s| parse_symbol_expr(s).map_err(|e| e.to_string()))
            };
            let (p1, p2) = (sym("p1"), sym("p2"));
            let powers = r.typed("powers", "a list of M1:M2 pairs", parse_powers).unwrap_or_else(|| vec![(1, 0), (0, 1), (1, 1), (2, 0)]);
            match (p1, p2) {
                (Some(p1), Some(p2)) => Some(Stage::Defect { p1, p2, powers }),
                _ => None,
            }
        }
        Some("coefficient_bounds") => {
            r.required("k", "a positive integer", |s| s.parse().ok().filter(|&k: &u32| k >= 1)).map(|k| Stage::CoefficientBounds { k })
        }
        Some("kernel") => {
            let k = r.required("k", "a positive integer", |s| s.parse().ok().filter(|&k: &u32| k >= 1));
            let js = r.orders("j").unwrap_or_else(|| vec![0]);
            let scales = r.typed("a", "a list of scales (numbers or h^e)", |s| {
                let v: Option<Vec<HValue>> = list(s).into_iter().map(parse_hvalue).collect();
                v.filter(|v| !v.is_empty())
            });
            match (k, scales) {
                (Some(k), Some(scales)) => Some(Stage::Kernel { k, js, scales }),
                (Some(k), None) => Some(Stage::Kernel { k, js, scales: vec![HValue::Const(0.5)] }),
                _ => None,
            }
        }
        Some("contact") => {
            let base = match r.raw("base") {
                Some(_) => r.checked("base", "a graph function", |s| parse_graph_fn(s).map_err(|e| e.to_string())),
                None => Some(qml::symbols::GraphFn::CircleGraph),
            };
            let ks = r.required("k", "a list of non-negative integers", |s| {
                let v: Option<Vec<u32>> = list(s).into_iter().map(|x| x.parse().ok()).collect();
                v.filter(|v| !v.is_empty())
            });
            let x1s = r.numbers("x1").unwrap_or_else(|| vec![0.1, 0.3]);
            match (base, ks) {
                (Some(base), Some(ks)) => Some(Stage::Contact { base, ks, x1s }),
                _ => None,
            }
        }
        Some(other) => {
            let line = r.raw("kind").map_or(sec.line, |(_, l)| l);
            r.fail(line, format!("unknown stage kind '{other}'"));
            // Parameters of an unknown stage are not reported separately.
            return None;
        }
        None => return None,
    };
    r.finish();
    stage
}

fn parse_expected(s: &str) -> Option<Expected> {
    if let Some(v) = parse_number(s) {
        return Some(Expected::Value(v));
    }
    let (negate, name) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let exponent = match name {
        "delta_p_k" => Exponent::DeltaPK,
        "sogge_delta" => Exponent::SoggeDelta,
        "talpha_inf" => Exponent::TalphaInf,
        _ => return None,
    };
    Some(Expected::Named { negate, exponent })
}

const FILTER_RESERVED: [&str; 7] = ["kind", "quantity", "expected", "tolerance", "max", "p", "alpha"];

fn parse_assert(sec: &Section, errs: &mut Vec<ConfigError>) -> Option<Assertion> {
    let mut r = Reader::new(sec, errs);
    let kind = r.required("kind", "an assertion kind", |s| Some(s.to_string()));
    let mut filter = Filter {
        p: r.checked("p", "an exponent", |s| s.parse::<Lebesgue>().map_err(|e| e.to_string())),
        k: r.order("k"),
        j: r.order("j"),
        alpha: r.typed("alpha", "a number or alpha_k(k)", parse_alpha),
        params: Vec::new(),
    };
    let extra: Vec<&Entry> = sec
        .entries
        .iter()
        .filter(|e| !FILTER_RESERVED.contains(&e.key.as_str()) && e.key != "k" && e.key != "j")
        .collect();
    let (check, default_quantity) = match kind.as_deref() {
        Some("slope") => {
            let expected = r.required("expected", "a number or [-]delta_p_k, [-]sogge_delta, [-]talpha_inf", parse_expected);
            let tolerance = r.number("tolerance").unwrap_or(0.05);
            (expected.map(|expected| Check::Slope { expected, tolerance }), None)
        }
        Some("spread") => (Some(Check::Spread { max: r.number("max").unwrap_or(3.0) }), None),
        Some("kernel") => (Some(Check::Kernel), Some("kernel_ratio")),
        Some("contact") => (Some(Check::Contact), Some("contact_order")),
        Some("coefficients") => (Some(Check::Coefficients { max: r.number("max").unwrap_or(2.0) }), Some("coeff_worst")),
        Some(other) => {
            let line = r.raw("kind").map_or(sec.line, |(_, l)| l);
            r.fail(line, format!("unknown assertion kind '{other}'"));
            return None;
        }
        None => return None,
    };
    let quantity = match default_quantity {
        Some(q) => q.to_string(),
        None => r.required("quantity", "a measurement name", |s| Some(s.to_string())).unwrap_or_default(),
    };
    // Remaining keys filter on measurement parameters such as `M1` or `x1`.
    for e in extra {
        match parse_number(&e.value) {
            Some(v) => filter.params.push((e.key.clone(), v)),
            None => r.fail(e.line, format!("filter '{}' expects a number, got '{}'", e.key, e.value)),
        }
        r.used.insert(e.key.as_str());
    }
    if let Some(Check::Slope { expected: Expected::Named { exponent, .. }, .. }) = &check {
        let need_p = matches!(exponent, Exponent::DeltaPK | Exponent::SoggeDelta) && filter.p.is_none();
        let need_k = *exponent == Exponent::DeltaPK && filter.k.is_none();
        let need_alpha = *exponent == Exponent::TalphaInf && filter.alpha.is_none();
        for (missing, key) in [(need_p, "p"), (need_k, "k"), (need_alpha, "alpha")] {
            if missing {
                r.missing(key);
            }
        }
    }
    r.finish();
    check.map(|check| Assertion { line: sec.line, quantity, filter, check })
}

fn relative_path(s: &str) -> Result<PathBuf, String> {
    let p = Path::new(s);
    if s.is_empty() || p.components().any(|c| !matches!(c, Component::Normal(_) | Component::CurDir)) {
        return Err("must be a relative path inside the output root".into());
    }
    Ok(p.to_path_buf())
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'-')
}

/// Parses and validates a configuration, reporting every error found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errs = Vec::new();
    let sections = split_sections(text, &mut errs);
    let top = &sections[0];
    let mut r = Reader::new(top, &mut errs);
    let name = r.typed("name", "letters, digits, '_' or '-'", |s| valid_name(s).then(|| s.to_string()));
    let h_list = match r.raw("h_list") {
        None => None,
        Some((v, line)) => {
            let mut hs = Vec::new();
            for item in list(v) {
                match parse_number(item) {
                    Some(h) if h > 0.0 && h <= 1.0 => hs.push(h),
                    Some(h) => r.fail(line, format!("h = {h} is out of range (0, 1]")),
                    None => r.fail(line, format!("'h_list' expects numbers such as 2^-6 or 0.01, got '{item}'")),
                }
            }
            if list(v).is_empty() {
                r.fail(line, "'h_list' is empty".into());
            }
            Some(hs)
        }
    };
    let seed = r.typed("seed", "a non-negative integer", |s| s.parse().ok()).unwrap_or(0);
    r.finish();

    let mut grid = GridChoice::Auto;
    let mut stages = Vec::new();
    let mut stage_lines = Vec::new();
    let mut stage_sections = 0;
    let mut assertions = Vec::new();
    let (mut root, mut csv, mut report) = (PathBuf::from("."), None, None);
    let mut seen = BTreeSet::new();
    for sec in &sections[1..] {
        if matches!(sec.name.as_str(), "grid" | "output") && !seen.insert(sec.name.clone()) {
            errs.push(ConfigError { line: sec.line, msg: format!("section [{}] appears twice", sec.name) });
            continue;
        }
        match sec.name.as_str() {
            "grid" => {
                let mut r = Reader::new(sec, &mut errs);
                let half_width = r.number("half_width");
                let n = r.typed("n", "an even integer >= 16", |s| s.parse().ok().filter(|&n: &usize| n >= 16 && n % 2 == 0));
                let given = (r.raw("half_width").is_some(), r.raw("n").is_some());
                match (half_width, n) {
                    (Some(half_width), Some(n)) if half_width > 0.0 => grid = GridChoice::Fixed { half_width, n },
                    (Some(_), Some(_)) => {
                        let line = r.raw("half_width").map_or(sec.line, |(_, l)| l);
                        r.fail(line, "'half_width' must be positive".into());
                    }
                    _ if given.0 != given.1 => r.fail(sec.line, "[grid] needs both 'half_width' and 'n'".into()),
                    _ => {}
                }
                r.finish();
            }
            "stage" => {
                stage_sections += 1;
                if let Some(s) = parse_stage(sec, &mut errs) {
                    stages.push(s);
                    stage_lines.push(sec.line);
                }
            }
            "assert" => {
                if let Some(a) = parse_assert(sec, &mut errs) {
                    assertions.push(a);
                }
            }
            _ => {
                let mut r = Reader::new(sec, &mut errs);
                if let Some((v, _)) = r.raw("root") {
                    root = PathBuf::from(v);
                }
                csv = r.checked("csv", "a file name", relative_path);
                report = r.checked("report", "a file name", relative_path);
                r.finish();
            }
        }
    }

    if stage_sections == 0 {
        errs.push(ConfigError { line: 0, msg: "no pipeline: the configuration defines no [stage]".into() });
    } else if stages.len() == stage_sections {
        if let Err((i, msg)) = check_chain(&stages) {
            errs.push(ConfigError { line: stage_lines[i], msg: format!("broken stage chain: {msg}") });
        }
    }
    if name.is_none() && !text.trim().is_empty() && !errs.iter().any(|e| e.msg.contains("'name'")) {
        errs.push(ConfigError { line: 0, msg: "configuration requires 'name'".into() });
    }
    if h_list.is_none() && stage_sections > 0 {
        errs.push(ConfigError { line: 0, msg: "configuration requires 'h_list'".into() });
    }
    errs.sort_by_key(|e| e.line);
    if !errs.is_empty() {
        return Err(ConfigErrors(errs));
    }
    let name = name.expect("checked");
    Ok(ExperimentConfig {
        csv: csv.unwrap_or_else(|| PathBuf::from(format!("{name}.csv"))),
        report: report.unwrap_or_else(|| PathBuf::from(format!("{name}.md"))),
        name,
        h_list: h_list.expect("checked"),
        seed,
        grid,
        stages,
        assertions,
        root,
        text: text.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "name = tiny\nh_list = 2^-5, 0.01\n\n[stage]\nkind = construct\nsource = t_alpha\nalpha = 0.5\n\n[stage]\nkind = norm\np = 2, inf\n";

    fn errors(text: &str) -> Vec<ConfigError> {
        parse_config(text).unwrap_err().0
    }

    #[test]
    fn empty_file_has_no_pipeline() {
        let e = errors("");
        assert_eq!(e.len(), 1);
        assert!(e[0].msg.starts_with("no pipeline"), "{e:?}");
        assert!(errors("# only a comment\n")[0].msg.starts_with("no pipeline"));
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.name, "tiny");
        assert_eq!(c.h_list, vec![1.0 / 32.0, 0.01]);
        assert_eq!(c.grid, GridChoice::Auto);
        assert_eq!(c.stages.len(), 2);
        assert_eq!((c.csv, c.report, c.root), ("tiny.csv".into(), "tiny.md".into(), ".".into()));
        assert!(c.assertions.is_empty());
    }

    #[test]
    fn h_out_of_range_names_its_line() {
        let e = errors(&MINIMAL.replace("2^-5, 0.01", "1.5"));
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].line, 2);
        assert!(e[0].msg.contains("out of range"), "{e:?}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "name = t\nh_list = 0.1\ncolour = red\n[stage]\nkind = construct\nsource = t_alpha\nalpha = lots\n[stage]\nkind = norm\np = 2\nq = 3\n";
        let e = errors(text);
        let lines: Vec<usize> = e.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![3, 7, 11], "{e:?}");
        assert!(e[0].msg.contains("unknown key 'colour'"));
        assert!(e[1].msg.contains("expects a number or alpha_k"));
        assert!(e[2].msg.contains("unknown key 'q'"));
    }

    #[test]
    fn broken_chain_reported_at_stage() {
        let text = "name = t\nh_list = 0.1\n[stage]\nkind = construct\nsource = flat_model\nk = 1\n[stage]\nkind = cwt\n[stage]\nkind = norm\np = 2\n";
        let e = errors(text);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].line, 9);
        assert!(e[0].msg.contains("needs field but receives coefficients"));
    }

    #[test]
    fn grid_output_and_assertions() {
        let text = format!(
            "{MINIMAL}[grid]\nhalf_width = 12.5\nn = 256\n[output]\nroot = runs\ncsv = a/b.csv\n[assert]\nkind = slope\nquantity = lp_norm\np = inf\nalpha = 0.5\nexpected = -talpha_inf\n[assert]\nkind = spread\nquantity = defect_ratio\nM1 = 1\nM2 = 0\nmax = 3\n"
        );
        let c = parse_config(&text).unwrap();
        assert_eq!(c.grid, GridChoice::Fixed { half_width: 12.5, n: 256 });
        assert_eq!((c.root, c.csv), ("runs".into(), "a/b.csv".into()));
        assert_eq!(c.assertions.len(), 2);
        assert_eq!(
            c.assertions[0].check,
            Check::Slope { expected: Expected::Named { negate: true, exponent: Exponent::TalphaInf }, tolerance: 0.05 }
        );
        assert_eq!(c.assertions[1].filter.params, vec![("M1".to_string(), 1.0), ("M2".to_string(), 0.0)]);
    }

    #[test]
    fn output_paths_stay_inside_root() {
        let e = errors(&format!("{MINIMAL}[output]\ncsv = ../x.csv\nreport = /tmp/r.md\n"));
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn named_exponent_needs_its_coordinates() {
        let e = errors(&format!("{MINIMAL}[assert]\nkind = slope\nquantity = lp_norm\nexpected = delta_p_k\n"));
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn numbers_and_symbols() {
        assert_eq!(parse_number("2^-6"), Some(1.0 / 64.0));
        assert_eq!(parse_number("1/8"), Some(0.125));
        assert_eq!(parse_number("1e-2"), Some(0.01));
        assert_eq!(parse_number("nan"), None);
        assert_eq!(parse_number("0x10"), None);
        assert_eq!(parse_alpha("alpha_k(2)"), Some(1.0 / 3.0));
        assert_eq!(parse_hvalue("h^0.3"), Some(HValue::HPow(0.3)));
        let text = "name = t\nh_list = 0.1\n[stage]\nkind = contact\nbase = bent_circle(\nk = 1\n";
        assert_eq!(errors(text)[0].line, 5);
    }
}
