//! Command-line front end. [`run`] parses arguments, calls the library and
//! returns the rendered output with an exit code; `main` only does the I/O.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hyperortho::exactpoly::parse_rational;
use hyperortho::ladder::{assoc_from_phi, HalfPowerFn};
use hyperortho::polygen::PolySystemSlice;
use hyperortho::schrodinger::fd::{default_window, fd_eigensolve, SpectrumReport};
use hyperortho::schrodinger::PotentialModel;
use hyperortho::suites::{run_suite, suite_systems, Status, Suite, SuiteOptions, SuiteReport};
use hyperortho::system::SystemDescriptor;
use hyperortho::{CaseTag, Error, HyperSystem, Rational, RationalPoly};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Threshold for the automatic `eigen` window.
pub const AUTO_WINDOW_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "hyperortho", version, about = "Orthogonal polynomials of hypergeometric type and their potentials")]
pub struct Cli {
    /// Output format (potential defaults to csv, everything else to json)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true, default_value_t = hyperortho::quad::DEFAULT_TOL_ABS)]
    pub tol_abs: f64,
    #[arg(long, global = true, default_value_t = hyperortho::quad::DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    /// Adds seeded random admissible systems to `check`
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// const | linear | one_minus_s2 | s2_minus_one | s2 | s2_plus_one (or the σ label)
    #[arg(long)]
    pub case: String,
    /// Integer or p/q
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Integer or p/q
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Case data, weight, interval and cutoff of a system
    Classify(SystemArgs),
    /// Monic polynomials Φ_0 … Φ_lmax
    Polys {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 4)]
        lmax: usize,
        /// Also sample each polynomial at this many interior points
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Associated function Φ_{l,m} = κ^m Φ_l^{(m)}
    Assoc {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
    },
    /// Run a verification suite over a parameter grid
    Check {
        suite: String,
        #[arg(long)]
        case: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "beta")]
        alpha: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "alpha")]
        beta: Option<String>,
        #[arg(long)]
        lmax: Option<usize>,
    },
    /// Samples of (x, W_m, V_m) on a uniform grid
    Potential {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Finite-difference spectrum of V_m against λ_m, λ_{m+1}, …
    Eigen {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// a:b (chosen automatically when absent)
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub system: SystemDescriptor,
    pub sigma: String,
    pub sigma_coeffs: RationalPoly,
    pub tau: RationalPoly,
    pub weight: String,
    pub interval: String,
    pub nu: String,
    pub max_index: Option<usize>,
    pub admissible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyRow {
    pub l: usize,
    pub lambda: String,
    pub coeffs: RationalPoly,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyTable {
    pub system: SystemDescriptor,
    pub nu: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    pub rows: Vec<PolyRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssocReport {
    pub system: SystemDescriptor,
    pub l: usize,
    pub m: usize,
    pub p: RationalPoly,
    pub lambda_l: String,
    pub lambda_m: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSample {
    pub x: f64,
    pub w: f64,
    pub v: f64,
}

/// Float formatting for CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_system(args: &SystemArgs) -> Result<HyperSystem, Error> {
    let case: CaseTag = args.case.parse()?;
    HyperSystem::new(case, parse_rational(&args.alpha)?, parse_rational(&args.beta)?)
}

pub fn parse_window(text: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::Parse(format!("expected a window a:b, got {text:?}"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn classify(sys: &HyperSystem) -> ClassifyReport {
    ClassifyReport {
        system: sys.descriptor(),
        sigma: sys.case().sigma_label().to_string(),
        sigma_coeffs: sys.sigma().clone(),
        tau: sys.tau().clone(),
        weight: sys.weight_formula(),
        interval: sys.interval_label(),
        nu: sys.nu().to_string(),
        max_index: sys.nu().max_index(),
        admissible: true,
    }
}

pub fn poly_table(sys: &HyperSystem, l_max: usize, grid: Option<usize>) -> Result<PolyTable, Error> {
    let slice = PolySystemSlice::new(sys, l_max)?;
    let points = grid.map(|n| sys.interior_points(n));
    let rows = slice
        .polys()
        .iter()
        .enumerate()
        .map(|(l, p)| PolyRow {
            l,
            lambda: hyperortho::exactpoly::format_rational(&sys.lambda(l)),
            coeffs: p.clone(),
            samples: points.as_ref().map(|pts| pts.iter().map(|&s| p.eval_float(s)).collect()),
        })
        .collect();
    Ok(PolyTable { system: sys.descriptor(), nu: sys.nu().to_string(), grid: points, rows })
}

pub fn assoc(sys: &HyperSystem, l: usize, m: usize) -> Result<AssocReport, Error> {
    let slice = PolySystemSlice::new(sys, l)?;
    let HalfPowerFn { m, p } = assoc_from_phi(&slice, l, m)?;
    let fmt = |r: Rational| hyperortho::exactpoly::format_rational(&r);
    Ok(AssocReport { system: sys.descriptor(), l, m, p, lambda_l: fmt(sys.lambda(l)), lambda_m: fmt(sys.lambda(m)) })
}

/// `n` equally spaced points from `xmin` to `xmax` inclusive.
pub fn potential_samples(model: &PotentialModel, xmin: f64, xmax: f64, n: usize) -> Result<Vec<PotentialSample>, Error> {
    if n < 2 || xmin.is_nan() || xmax.is_nan() || xmin >= xmax {
        return Err(Error::InvalidIndex(format!("need n >= 2 and xmin < xmax, got n = {n}, [{xmin}, {xmax}]")));
    }
    let h = (xmax - xmin) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = if i == n - 1 { xmax } else { xmin + h * i as f64 };
            let xp = model.x_point(x)?;
            Ok(PotentialSample { x, w: model.w_at(&xp), v: model.v_at(&xp) })
        })
        .collect()
}

pub fn eigen(model: &PotentialModel, window: Option<(f64, f64)>, n: usize, levels: usize) -> Result<SpectrumReport, Error> {
    let window = match window {
        Some(w) => w,
        None => default_window(model, levels, AUTO_WINDOW_THRESHOLD)?,
    };
    fd_eigensolve(model, n, window, levels)
}

pub fn suite_report(
    suite: Suite,
    case: Option<&str>,
    params: Option<(&str, &str)>,
    l_max: Option<usize>,
    tol: (f64, f64),
    seed: Option<u64>,
) -> Result<SuiteReport, Error> {
    let case: Option<CaseTag> = case.map(str::parse).transpose()?;
    let systems = match (case, params) {
        (Some(c), Some((a, b))) => vec![HyperSystem::new(c, parse_rational(a)?, parse_rational(b)?)?],
        (None, Some(_)) => return Err(Error::Parse("--alpha/--beta need --case".into())),
        (c, None) => suite_systems(c, seed),
    };
    let opts = SuiteOptions { l_max, tol_abs: tol.0, tol_rel: tol.1 };
    Ok(run_suite(suite, &systems, &opts))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn csv_rows(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

pub fn render_classify(r: &ClassifyReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let join = |p: &RationalPoly| p.to_strings().join(" ");
            csv_rows(vec![
                vec!["case", "alpha", "beta", "sigma", "tau", "weight", "interval", "nu", "admissible"]
                    .into_iter()
                    .map(String::from)
                    .collect(),
                vec![
                    r.system.case.name().to_string(),
                    hyperortho::exactpoly::format_rational(&r.system.alpha),
                    hyperortho::exactpoly::format_rational(&r.system.beta),
                    r.sigma.clone(),
                    join(&r.tau),
                    r.weight.clone(),
                    r.interval.clone(),
                    r.nu.clone(),
                    r.admissible.to_string(),
                ],
            ])
        }
    }
}

pub fn render_polys(t: &PolyTable, format: Format) -> String {
    match format {
        Format::Json => json(t),
        Format::Csv => {
            let width = t.rows.iter().map(|r| r.coeffs.coeffs().len()).max().unwrap_or(1);
            let mut header = vec!["l".to_string(), "lambda".to_string()];
            header.extend((0..width).map(|i| format!("c{i}")));
            let mut rows = vec![header];
            for r in &t.rows {
                let mut row = vec![r.l.to_string(), r.lambda.clone()];
                let mut cs = r.coeffs.to_strings();
                cs.resize(width, "0/1".to_string());
                row.extend(cs);
                rows.push(row);
            }
            if let Some(grid) = &t.grid {
                rows.push(["s".to_string()].into_iter().chain(t.rows.iter().map(|r| format!("phi_{}", r.l))).collect());
                for (i, s) in grid.iter().enumerate() {
                    let mut row = vec![fmt_f64(*s)];
                    row.extend(t.rows.iter().map(|r| fmt_f64(r.samples.as_ref().expect("sampled")[i])));
                    rows.push(row);
                }
            }
            csv_rows(rows)
        }
    }
}

pub fn render_assoc(a: &AssocReport, format: Format) -> String {
    match format {
        Format::Json => json(a),
        Format::Csv => {
            let mut header = vec!["l".to_string(), "m".to_string()];
            header.extend((0..a.p.coeffs().len().max(1)).map(|i| format!("p{i}")));
            let mut row = vec![a.l.to_string(), a.m.to_string()];
            row.extend(a.p.to_strings());
            csv_rows(vec![header, row])
        }
    }
}

pub fn render_suite(r: &SuiteReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
            let mut rows = vec!["case,alpha,beta,check,l,m,k,status,residual,detail"
                .split(',')
                .map(String::from)
                .collect::<Vec<_>>()];
            for s in &r.systems {
                for c in &s.checks {
                    let residual = match &c.residual {
                        Some(hyperortho::suites::Residual::Exact(t)) => t.clone(),
                        Some(hyperortho::suites::Residual::Float(x)) => fmt_f64(*x),
                        None => String::new(),
                    };
                    let status = match c.status {
                        Status::Pass => "pass",
                        Status::Fail => "fail",
                        Status::Skipped => "skipped",
                    };
                    rows.push(vec![
                        s.system.case.name().to_string(),
                        hyperortho::exactpoly::format_rational(&s.system.alpha),
                        hyperortho::exactpoly::format_rational(&s.system.beta),
                        c.check.clone(),
                        opt(c.l),
                        opt(c.m),
                        opt(c.k),
                        status.to_string(),
                        residual,
                        c.detail.clone().unwrap_or_default(),
                    ]);
                }
            }
            csv_rows(rows)
        }
    }
}

pub fn render_potential(samples: &[PotentialSample], format: Format) -> String {
    match format {
        Format::Json => json(&samples),
        Format::Csv => {
            let mut out = String::from("x,W,V\n");
            for s in samples {
                let _ = writeln!(out, "{},{},{}", fmt_f64(s.x), fmt_f64(s.w), fmt_f64(s.v));
            }
            out
        }
    }
}

pub fn render_spectrum(r: &SpectrumReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut out = String::from("level,fd,analytic,residual\n");
            for (k, fd) in r.fd_eigenvalues.iter().enumerate() {
                let an = r.analytic.get(k).map(|x| fmt_f64(*x)).unwrap_or_default();
                let res = r.residuals.get(k).map(|x| fmt_f64(*x)).unwrap_or_default();
                let _ = writeln!(out, "{k},{},{an},{res}", fmt_f64(*fd));
            }
            out
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let fmt = |default: Format| cli.format.unwrap_or(default);
    let done = |stdout: String| Outcome { code: EXIT_OK, stdout, stderr: String::new() };
    let result: Result<Outcome, Error> = (|| match &cli.command {
        Command::Classify(s) => Ok(done(render_classify(&classify(&parse_system(s)?), fmt(Format::Json)))),
        Command::Polys { system, lmax, grid } => {
            let sys = parse_system(system)?;
            Ok(done(render_polys(&poly_table(&sys, *lmax, *grid)?, fmt(Format::Json))))
        }
        Command::Assoc { system, l, m } => {
            let sys = parse_system(system)?;
            Ok(done(render_assoc(&assoc(&sys, *l, *m)?, fmt(Format::Json))))
        }
        Command::Check { suite, case, alpha, beta, lmax } => {
            let suite: Suite = suite.parse()?;
            let params = alpha.as_deref().zip(beta.as_deref());
            let r = suite_report(suite, case.as_deref(), params, *lmax, (cli.tol_abs, cli.tol_rel), cli.seed)?;
            let mut out = done(render_suite(&r, fmt(Format::Json)));
            if !r.passed {
                out.code = EXIT_FAILED;
                out.stderr = format!("suite {suite} failed: {} failing checks\n", r.count(Status::Fail));
            }
            Ok(out)
        }
        Command::Potential { system, m, xmin, xmax, n } => {
            let model = PotentialModel::new(&parse_system(system)?, *m)?;
            Ok(done(render_potential(&potential_samples(&model, *xmin, *xmax, *n)?, fmt(Format::Csv))))
        }
        Command::Eigen { system, m, window, n, levels } => {
            let model = PotentialModel::new(&parse_system(system)?, *m)?;
            let window = window.as_deref().map(parse_window).transpose()?;
            Ok(done(render_spectrum(&eigen(&model, window, *n, *levels)?, fmt(Format::Json))))
        }
    })();
    match result {
        Ok(o) => o,
        Err(e) => Outcome::usage(e),
    }
}
