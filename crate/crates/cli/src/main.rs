use clap::{Args, Parser, Subcommand};
use qml::estimates::{
    kernel_bound_check, kernel_query, kernel_sample, kernel_sample_times, HValue, KernelPhase, Lebesgue,
};
use qml::grid::{lp_norm, Field2D, GridSpec};
use qml::io::{decode_field, encode_coefficients, encode_field, encode_phase_table};
use qml::propagator::{phase_table_with, quasimode_pushforward, PhaseOptions};
use qml::quasimodes::{build_t_alpha, joint_defect, DefectReport, TAlphaSpec};
use qml::symbols::{parse_symbol_expr, GraphFn, SymbolSpec};
use qml::wavelets::{cwt_forward, spectral_coefficients, DyadicPartition, ScaleGrid, WaveletSpec, SCALES_PER_DECADE};
use qml_cli::{parse_config, parse_number, parse_sweep_csv, report_from_rows, threads_from_env, EXIT_ERROR};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qml", version, about = "Semiclassical joint-quasimode numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the tube quasimode T_alpha and write it as a field container.
    Construct(ConstructArgs),
    /// Joint defects of a field under two symbols, as CSV rows.
    Defect(DefectArgs),
    /// Push a field forward along the WKB propagator.
    Propagate(PropagateArgs),
    /// Continuous wavelet transform in x1.
    Cwt(CwtArgs),
    /// Dyadic kernel samples and the regime bound check.
    Kernel(KernelArgs),
    /// Run a configured h-sweep and write its CSV and markdown report.
    Sweep(SweepArgs),
    /// Re-evaluate a configuration's assertions against an existing CSV.
    Report(ReportArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Half width L of the box [-L, L); requires --n.
    #[arg(long, requires = "n")]
    half_width: Option<f64>,
    /// Points per axis; requires --half-width.
    #[arg(long, requires = "half_width")]
    n: Option<usize>,
}

impl GridArgs {
    fn grid(&self, h: f64, default: impl FnOnce() -> qml::Result<GridSpec>) -> qml::Result<GridSpec> {
        match (self.half_width, self.n) {
            (Some(l), Some(n)) => GridSpec::new(l, n, h),
            _ => default(),
        }
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    out: PathBuf,
    /// Exponents whose norms are printed, e.g. 6,8,inf.
    #[arg(long, value_delimiter = ',', default_value = "2,inf")]
    p: Vec<Lebesgue>,
    #[arg(long)]
    smoothed_edges: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct DefectArgs {
    /// Field container; otherwise T_alpha is built from --alpha and --h.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Contact order of the default second symbol.
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value = "circle_minus_one")]
    p1: String,
    /// Defaults to contact_circle(k=K, c=1).
    #[arg(long)]
    p2: Option<String>,
    /// Power pairs M1:M2.
    #[arg(long, value_delimiter = ',', default_value = "1:0,0:1,1:1,2:0")]
    powers: Vec<String>,
}

#[derive(Args)]
struct PropagateArgs {
    /// Symbol expression, e.g. circle_graph.
    #[arg(long)]
    a: String,
    /// Largest |x1| carried by the phase table.
    #[arg(long)]
    x1: f64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the phase table container.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    xi_cut: Option<f64>,
}

#[derive(Args)]
struct CwtArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = SCALES_PER_DECADE)]
    per_decade: u32,
    #[arg(long)]
    a_min: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    /// Store FT in x2 instead of x2 samples.
    #[arg(long)]
    spectral: bool,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, value_delimiter = ',', default_value = "0,2,4")]
    j: Vec<u32>,
    /// Scales, as numbers or h^e.
    #[arg(long, value_delimiter = ',', default_value = "h^0.3,0.5")]
    a: Vec<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides the configuration's.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    csv: PathBuf,
    /// Markdown destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

type Outcome = Result<u8, String>;

fn read_field(path: &Path) -> Result<Field2D, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    decode_field(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), String> {
    std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn s<E: ToString>(e: E) -> String {
    e.to_string()
}

fn construct(a: ConstructArgs) -> Outcome {
    let mut spec = TAlphaSpec::new(a.h, a.alpha).map_err(s)?;
    spec.smoothed_edges = a.smoothed_edges;
    let g = a.grid.grid(a.h, || spec.default_grid()).map_err(s)?;
    let u = build_t_alpha(&spec, &g).map_err(s)?;
    write(&a.out, &encode_field(&u))?;
    println!("wrote {} (N = {}, L = {}, h = {})", a.out.display(), g.n, g.half_width, g.h);
    for p in a.p {
        println!("p = {p}: {}", lp_norm(&u, p.to_f64()).map_err(s)?);
    }
    Ok(0)
}

fn defect(a: DefectArgs) -> Outcome {
    let (u, alpha) = match (&a.input, a.alpha, a.h) {
        (Some(path), alpha, _) => (read_field(path)?, alpha),
        (None, Some(alpha), Some(h)) => {
            let spec = TAlphaSpec::new(h, alpha).map_err(s)?;
            (build_t_alpha(&spec, &spec.default_grid().map_err(s)?).map_err(s)?, Some(alpha))
        }
        _ => return Err("defect needs --in or both --alpha and --h".into()),
    };
    let p1 = parse_symbol_expr(&a.p1).map_err(s)?;
    let p2 = match &a.p2 {
        Some(t) => parse_symbol_expr(t).map_err(s)?,
        None => SymbolSpec::contact_circle(a.k, 1.0).map_err(s)?,
    };
    println!("h,alpha,M1,M2,defect,ratio_to_power");
    for pair in &a.powers {
        let (m1, m2) = pair
            .split_once(':')
            .and_then(|(x, y)| Some((x.trim().parse().ok()?, y.trim().parse().ok()?)))
            .ok_or_else(|| format!("power pair '{pair}' is not M1:M2"))?;
        let r: DefectReport = joint_defect(&p1, &p2, &u, m1, m2).map_err(s)?;
        let alpha = alpha.map_or(String::new(), |v| v.to_string());
        println!("{},{alpha},{m1},{m2},{},{}", r.h, r.defect, r.ratio_to_power);
    }
    Ok(0)
}

fn propagate(a: PropagateArgs) -> Outcome {
    let sym = parse_symbol_expr(&a.a).map_err(s)?;
    let u = read_field(&a.input)?;
    let g = u.grid;
    let times: Vec<f64> = (0..g.n).map(|i| g.x(i)).filter(|x| x.abs() <= a.x1).collect();
    let opts = PhaseOptions { xi_cut: a.xi_cut, ..PhaseOptions::default() };
    let table = phase_table_with(&sym, g, &times, opts).map_err(s)?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let v = quasimode_pushforward(&table, &u).map_err(s)?;
    write(&a.out, &encode_field(&v))?;
    if let Some(path) = &a.table {
        write(path, &encode_phase_table(&table))?;
    }
    println!("wrote {}: ||Wu|| / ||u|| = {}", a.out.display(), v.l2_norm() / u.l2_norm());
    Ok(0)
}

fn cwt(a: CwtArgs) -> Outcome {
    let u = read_field(&a.input)?;
    let d = ScaleGrid::default_for(&u.grid).map_err(s)?;
    let lo = a.a_min.unwrap_or_else(|| d.scale(d.m_min));
    let hi = a.a_max.unwrap_or_else(|| 4.0f64.min(u.grid.half_width));
    let sg = ScaleGrid::covering(lo, hi, a.per_decade).map_err(s)?;
    let mut x = cwt_forward(&u, &WaveletSpec::poly_bump(), &sg).map_err(s)?;
    if a.spectral {
        x = spectral_coefficients(&x).map_err(s)?;
    }
    write(&a.out, &encode_coefficients(&x))?;
    println!("wrote {}: {} scales in [{lo}, {hi}]", a.out.display(), x.slices.len());
    Ok(0)
}

fn kernel(a: KernelArgs) -> Outcome {
    let part = DyadicPartition::new(a.h, a.k).map_err(s)?;
    let w = WaveletSpec::poly_bump();
    let mut samples = Vec::new();
    println!("h,k,j,a,t,regime,sup");
    for text in &a.a {
        let sc = match text.trim().strip_prefix("h^") {
            Some(e) => HValue::HPow(e.parse().map_err(|_| format!("bad scale '{text}'"))?),
            None => HValue::Const(parse_number(text).ok_or_else(|| format!("bad scale '{text}'"))?),
        };
        let scale = sc.at(a.h);
        for &j in &a.j {
            for t in kernel_sample_times(a.h, a.k, j, scale) {
                let smp = kernel_sample(KernelPhase::Flat(GraphFn::Free), &w, &part, j, scale, t).map_err(s)?;
                println!("{},{},{},{},{},{},{}", smp.h, smp.k, smp.j, smp.a, smp.t, smp.regime.name(), smp.sup);
                samples.push(smp);
            }
        }
    }
    let r = kernel_bound_check(&samples, &kernel_query(a.k).map_err(s)?).map_err(s)?;
    for fit in [&r.small, &r.large] {
        eprintln!("{}: C = {:.4}, ratios in [{:.4}, {:.4}]", fit.regime.name(), fit.constant, fit.min_ratio, fit.max_ratio);
    }
    eprintln!("{}", if r.pass { "PASS" } else { "FAIL" });
    Ok(if r.pass { 0 } else { 2 })
}

fn load_config(path: &Path) -> Result<qml_cli::ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}:\n{e}", path.display()))
}

fn sweep(a: SweepArgs) -> Outcome {
    let c = load_config(&a.config)?;
    let report = qml_cli::run(&c);
    let root = a.out.unwrap_or_else(|| c.root.clone());
    let (csv, md) = report.write(&root, &c.csv, &c.report).map_err(s)?;
    for r in &report.rows {
        if let Some((stage, why)) = &r.refused {
            eprintln!("h = {}: {stage} refused: {why}", r.h);
        }
    }
    for x in &report.assertions {
        println!("{} {}: {}", if x.pass { "PASS" } else { "FAIL" }, x.description, x.measured);
    }
    println!("wrote {} and {}", csv.display(), md.display());
    Ok(report.exit_code() as u8)
}

fn report(a: ReportArgs) -> Outcome {
    let c = load_config(&a.config)?;
    let text = std::fs::read_to_string(&a.csv).map_err(|e| format!("{}: {e}", a.csv.display()))?;
    let (_, rows) = parse_sweep_csv(&text)?;
    let r = report_from_rows(&c, rows);
    match &a.out {
        Some(path) => write(path, r.markdown().as_bytes())?,
        None => print!("{}", r.markdown()),
    }
    Ok(r.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    let outcome = match cli.command {
        Command::Construct(a) => construct(a),
        Command::Defect(a) => defect(a),
        Command::Propagate(a) => propagate(a),
        Command::Cwt(a) => cwt(a),
        Command::Kernel(a) => kernel(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
