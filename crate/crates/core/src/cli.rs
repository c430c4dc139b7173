//! Command-line front end.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cbc::{cbc, default_n, CbcConfig, CbcMode};
use crate::digitspace::{hoplps_points, Rule};
use crate::error::Error;
use crate::gfpoly::{GFPoly, Modulus, PrimeBase};
use crate::kernel::{
    criterion_b, criterion_b_brute, theoretical_bound, worst_case_error_sq_of, SpaceParams,
};
use crate::rule_io::{format_decimal, points_csv, RuleFile, TraceFile};

/// Largest point count for which the O(N^2) error sum runs without --force.
pub const ERROR_SUM_LIMIT: usize = 1 << 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SCALE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "foldnet",
    version,
    about = "Folded higher-order polynomial lattice rules"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a rule by component-by-component search.
    Construct(ConstructArgs),
    /// Write the points of a rule as CSV.
    Points(PointsArgs),
    /// Report the criterion, worst-case error and a-priori bound of a rule.
    Analyze(AnalyzeArgs),
    /// Tabulate error against point count over a range of m.
    Convergence(ConvergenceArgs),
    /// Integrate a built-in test function with a rule.
    Integrate(IntegrateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Naive,
    Fast,
}

impl From<ModeArg> for CbcMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Naive => CbcMode::Naive,
            ModeArg::Fast => CbcMode::Fast,
        }
    }
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    #[arg(long, default_value_t = 2)]
    pub base: u32,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 2)]
    pub alpha: u32,
    /// Comma-separated weights, or `j^-2`.
    #[arg(long, default_value = "j^-2")]
    pub weights: String,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub m: usize,
    /// Defaults to ceil(alpha m / 2).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
    pub mode: ModeArg,
    /// Modulus coefficients, ascending, comma-separated.
    #[arg(long)]
    pub modulus: Option<String>,
    #[arg(long, default_value = "rule.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "trace.json")]
    pub trace: PathBuf,
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    pub rule: PathBuf,
    /// Apply the tent transform before projecting.
    #[arg(long)]
    pub folded: bool,
    /// Emit exact `numerator/denominator` values.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub rule: PathBuf,
    /// Also enumerate the dual lattice with digits below b^K.
    #[arg(long, value_name = "K")]
    pub brute: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub json: bool,
    /// Lift the point-count limit on the error sum.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Inclusive range `a:b`.
    #[arg(long = "m-range")]
    pub m_range: String,
    /// Rows used for each trailing slope fit.
    #[arg(long, default_value_t = 5)]
    pub fit: usize,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    pub rule: PathBuf,
    #[arg(long, default_value = "product")]
    pub function: String,
    /// Comma-separated coefficients, one per coordinate (default all ones).
    #[arg(long)]
    pub c: Option<String>,
    /// Use the unfolded points.
    #[arg(long)]
    pub unfolded: bool,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::ScaleGuard(_)) {
            EXIT_SCALE
        } else {
            EXIT_USAGE
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    usage(format!("{}: {e}", path.display()))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| usage(format!("invalid {what}: {t:?}")))
        })
        .collect()
}

pub fn parse_weights(spec: &str, s: usize) -> Result<Vec<f64>, Failure> {
    if spec.trim() == "j^-2" {
        return Ok((1..=s).map(|j| 1.0 / (j * j) as f64).collect());
    }
    let w: Vec<f64> = parse_list(spec, "weight")?;
    if w.len() != s {
        return Err(usage(format!("expected {s} weights, got {}", w.len())));
    }
    Ok(w)
}

fn space_params(a: &SpaceArgs) -> Result<(PrimeBase, SpaceParams), Failure> {
    let base = PrimeBase::new(a.base)?;
    if a.s == 0 {
        return Err(usage("s must be >= 1"));
    }
    let params = SpaceParams::new(a.alpha, parse_weights(&a.weights, a.s)?, a.d)?;
    Ok((base, params))
}

fn load_rule(path: &Path) -> Result<(Rule, SpaceParams), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(RuleFile::from_json(&text)?.to_rule()?)
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn emit(out: &mut dyn std::io::Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| usage(e.to_string()))
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `prod_j (1 + c_j (x_j^alpha - 1/(alpha+1)))`, whose integral is 1.
pub fn product_test_function(x: &[f64], c: &[f64], alpha: u32) -> f64 {
    let shift = 1.0 / (alpha as f64 + 1.0);
    x.iter()
        .zip(c)
        .map(|(&xj, &cj)| 1.0 + cj * (xj.powi(alpha as i32) - shift))
        .product()
}

fn cmd_construct(a: &ConstructArgs, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    let (base, params) = space_params(&a.space)?;
    let mut cfg = CbcConfig::new(base, a.m, a.n, params.clone(), a.mode.into())?;
    if let Some(text) = &a.modulus {
        let coeffs: Vec<u32> = parse_list(text, "modulus coefficient")?;
        cfg = cfg.with_modulus(Modulus::new(GFPoly::new(base, coeffs)?)?)?;
    }
    let (rule, trace) = cbc(&cfg)?;
    write_file(&a.out, &RuleFile::new(&rule, &params).to_json())?;
    write_file(&a.trace, &TraceFile::from(&trace).to_json())?;
    let b = trace.criterion.last().copied().unwrap_or(0.0);
    let q: Vec<String> = trace.selected.iter().map(u64::to_string).collect();
    emit(
        out,
        &format!(
            "n = {}\nq = [{}]\nB = {}\nbound(lambda=1) = {}\n",
            cfg.n,
            q.join(", "),
            format_decimal(b),
            format_decimal(trace.bound_lambda1)
        ),
    )
}

fn cmd_points(a: &PointsArgs, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    let (rule, _) = load_rule(&a.rule)?;
    let mut pts = hoplps_points(&rule);
    if a.folded {
        pts = pts.folded();
    }
    let csv = points_csv(&pts, a.exact);
    match &a.out {
        Some(path) => write_file(path, &csv),
        None => emit(out, &csv),
    }
}

#[derive(Debug, Serialize)]
struct BruteReport {
    value: f64,
    truncation_bound: f64,
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    #[serde(rename = "B")]
    criterion: f64,
    brute: Option<BruteReport>,
    e: f64,
    lambda: f64,
    bound: f64,
    e_le_b: bool,
}

fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    let (rule, params) = load_rule(&a.rule)?;
    if rule.num_points() > ERROR_SUM_LIMIT && !a.force {
        return Err(Error::ScaleGuard(format!(
            "{} points exceed the error-sum limit of {ERROR_SUM_LIMIT}; pass --force",
            rule.num_points()
        ))
        .into());
    }
    let criterion = criterion_b(&rule, &params)?;
    let brute = match a.brute {
        Some(k) => {
            let r = criterion_b_brute(&rule, &params, k)?;
            Some(BruteReport {
                value: r.value,
                truncation_bound: r.truncation_bound,
            })
        }
        None => None,
    };
    let e = worst_case_error_sq_of(&hoplps_points(&rule).folded(), &params)?
        .max(0.0)
        .sqrt();
    let bound = theoretical_bound(rule.base().get(), rule.m(), rule.n(), &params, a.lambda)?.bound;
    let report = AnalyzeReport {
        criterion,
        brute,
        e,
        lambda: a.lambda,
        bound,
        e_le_b: e <= criterion + 1e-12,
    };
    let text = if a.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        let mut t = format!("B = {}\n", format_decimal(report.criterion));
        if let Some(b) = &report.brute {
            let _ = writeln!(
                t,
                "B (enumerated) = {} (truncation bound {})",
                format_decimal(b.value),
                format_decimal(b.truncation_bound)
            );
        }
        let _ = writeln!(t, "e = {}", format_decimal(report.e));
        let _ = writeln!(
            t,
            "bound(lambda={}) = {}",
            report.lambda,
            format_decimal(report.bound)
        );
        let _ = writeln!(t, "e <= B: {}", report.e_le_b);
        t
    };
    emit(out, &text)
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub points: u64,
    pub criterion: f64,
    pub e: f64,
    pub bound: f64,
}

/// Fast CBC with `n = ceil(alpha m / 2)` for each `m`, reporting the
/// worst-case error of the folded rule.
pub fn convergence_study(
    base: PrimeBase,
    params: &SpaceParams,
    ms: std::ops::RangeInclusive<usize>,
    force: bool,
) -> crate::Result<Vec<ConvergenceRow>> {
    ms.map(|m| {
        let npts = (base.get() as u64).pow(m as u32);
        if npts > ERROR_SUM_LIMIT as u64 && !force {
            return Err(Error::ScaleGuard(format!(
                "b^m = {npts} exceeds {ERROR_SUM_LIMIT}; pass --force"
            )));
        }
        let cfg = CbcConfig::new(
            base,
            m,
            Some(default_n(params.alpha, m)),
            params.clone(),
            CbcMode::Fast,
        )?;
        let (rule, trace) = cbc(&cfg)?;
        let e = worst_case_error_sq_of(&hoplps_points(&rule).folded(), params)?
            .max(0.0)
            .sqrt();
        Ok(ConvergenceRow {
            m,
            points: npts,
            criterion: *trace.criterion.last().expect("s >= 1"),
            e,
            bound: trace.bound_lambda1,
        })
    })
    .collect()
}

fn cmd_convergence(a: &ConvergenceArgs, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    let (base, params) = space_params(&a.space)?;
    let (lo, hi) = a
        .m_range
        .split_once(':')
        .and_then(|(x, y)| {
            Some((
                x.trim().parse::<usize>().ok()?,
                y.trim().parse::<usize>().ok()?,
            ))
        })
        .ok_or_else(|| usage(format!("invalid --m-range {:?}, expected a:b", a.m_range)))?;
    if lo == 0 || hi < lo {
        return Err(usage(format!("invalid --m-range {lo}:{hi}")));
    }
    if a.fit < 2 {
        return Err(usage("--fit must be >= 2"));
    }
    let rows = convergence_study(base, &params, lo..=hi, a.force)?;
    let with_slope = rows.len() >= 2;
    let mut csv = String::from("m,N,B,e,bound");
    if with_slope {
        csv.push_str(",slope");
    }
    csv.push('\n');
    let ln_b = (base.get() as f64).ln();
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(
            csv,
            "{},{},{},{},{}",
            r.m,
            r.points,
            format_decimal(r.criterion),
            format_decimal(r.e),
            format_decimal(r.bound)
        );
        if with_slope {
            csv.push(',');
            let start = (i + 1).saturating_sub(a.fit);
            if i > start {
                let window = &rows[start..=i];
                let xs: Vec<f64> = window.iter().map(|r| r.m as f64).collect();
                let ys: Vec<f64> = window.iter().map(|r| r.e.ln() / ln_b).collect();
                csv.push_str(&format_decimal(ls_slope(&xs, &ys)));
            }
        }
        csv.push('\n');
    }
    match &a.out {
        Some(path) => write_file(path, &csv),
        None => emit(out, &csv),
    }
}

fn cmd_integrate(a: &IntegrateArgs, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    if a.function != "product" {
        return Err(usage(format!(
            "unknown function {:?}; available: product",
            a.function
        )));
    }
    let (rule, params) = load_rule(&a.rule)?;
    let c = match &a.c {
        Some(text) => {
            let c: Vec<f64> = parse_list(text, "coefficient")?;
            if c.len() != rule.s() {
                return Err(usage(format!(
                    "expected {} coefficients, got {}",
                    rule.s(),
                    c.len()
                )));
            }
            c
        }
        None => vec![1.0; rule.s()],
    };
    let mut pts = hoplps_points(&rule);
    if !a.unfolded {
        pts = pts.folded();
    }
    let values: Vec<f64> = pts
        .project_f64()
        .iter()
        .map(|x| product_test_function(x, &c, params.alpha))
        .collect();
    let q = crate::kernel::kahan_sum(values) / pts.len() as f64;
    emit(
        out,
        &format!(
            "Q = {}\nI = 1\nerror = {}\n",
            format_decimal(q),
            format_decimal((q - 1.0).abs())
        ),
    )
}

/// Runs an already-parsed command, writing normal output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Construct(a) => cmd_construct(a, out),
        Command::Points(a) => cmd_points(a, out),
        Command::Analyze(a) => cmd_analyze(a, out),
        Command::Convergence(a) => cmd_convergence(a, out),
        Command::Integrate(a) => cmd_integrate(a, out),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => {
            let _ = lock.flush();
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
