use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kreinlab::entropy::{self, EntropyError};
use kreinlab::krein::{self, KreinError};
use kreinlab::numerics::Grid;
use kreinlab::opuc::{self, OpucError, VerblunskySeq};
use kreinlab::parse::parse_complex;
use kreinlab::potential::{figure1_table, write_figure1_csv};
use kreinlab::{verify, Potential};
use num_complex::Complex64;
use serde_json::{json, Value};

/// Lower and upper edge of the accepted `Σ E_a(n) / ‖a‖²_{H^-1}` band.
const RATIO_BAND: (f64, f64) = (0.01, 100.0);

#[derive(Parser)]
#[command(
    name = "kreinlab",
    version,
    about = "Krein systems, entropy functionals and OPUC experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Krein system for each λ and write one CSV per λ.
    Solve(SolveArgs),
    /// Scan E_a and D_a, fit decay classes and compare Σ E_a with the H^-1 norm.
    Entropy(EntropyArgs),
    /// Szegő recursion, Christoffel products and order estimates for a Verblunsky sequence.
    Opuc(OpucArgs),
    /// Run the built-in identity and bound checks.
    Verify(VerifyArgs),
    /// Write the oscillating example f(r) = sin(e^r)/(1+r) and its tail integral.
    Figure1(Figure1Args),
}

#[derive(Args)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Potential spec, e.g. `box:1,1`, `gaussian:1,1`, `figure1`, `sampled:a.csv`.
    #[arg(long)]
    potential: String,
    /// Spectral parameters, comma separated (`2`, `1+i`, `0.5-0.2i`).
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<String>,
    #[arg(long, default_value_t = 10.0)]
    rmax: f64,
    #[arg(long, default_value_t = 0.01)]
    dr: f64,
    #[arg(long, default_value_t = krein::DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    potential: String,
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long, default_value_t = 10.0)]
    rmax: f64,
    #[arg(long, default_value_t = 0.1)]
    dr: f64,
    /// Number N in Σ_{n=0}^{N} E_a(n).
    #[arg(long, default_value_t = 30)]
    terms: usize,
    /// Frequency cutoff for the H^-1 norm.
    #[arg(long, default_value_t = 200.0)]
    cutoff: f64,
    #[arg(long, default_value_t = entropy::DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "sequence")]
struct SeqArgs {
    /// Explicit coefficients, comma separated.
    #[arg(long)]
    alphas: Option<String>,
    /// `factorial:c,len` or `gaussian:c,len`.
    #[arg(long)]
    rule: Option<String>,
}

#[derive(Args)]
struct OpucArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// Estimate the orders of the coefficient sequence and of Π.
    #[arg(long)]
    orders: bool,
    /// Points on the unit circle for the recursion table.
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict to these check groups, comma separated.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct Figure1Args {
    #[arg(long, default_value_t = 8.0)]
    rmax: f64,
    #[arg(long, default_value_t = 0.01)]
    dr: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum Failure {
    Verification(String),
    Usage(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Usage(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Internal(format!("csv error: {e}"))
    }
}

impl From<KreinError> for Failure {
    fn from(e: KreinError) -> Self {
        match e {
            KreinError::Potential(p) => Failure::Usage(p.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<EntropyError> for Failure {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::Potential(p) => Failure::Usage(p.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<OpucError> for Failure {
    fn from(e: OpucError) -> Self {
        match e {
            OpucError::Modulus { .. } | OpucError::Spec(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("kreinlab: {}", f.message());
        return ExitCode::from(f.code());
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Opuc(a) => cmd_opuc(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Figure1(a) => cmd_figure1(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kreinlab: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("KREINLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "KREINLAB_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn positive(name: &str, x: f64) -> Result<f64, Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Usage(format!(
            "--{name} must be positive and finite, got {x}"
        )))
    }
}

/// Grid on `[a, b]` with spacing close to `step` and exact endpoints.
fn grid(a: f64, b: f64, step: f64) -> Result<Grid, Failure> {
    positive("dr", step)?;
    let n = ((b - a) / step).round().max(1.0) as usize;
    Grid::uniform(a, b, n).map_err(usage)
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| {
        Failure::Usage(format!(
            "cannot create output directory {}: {e}",
            dir.display()
        ))
    })
}

fn writer(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Pretty JSON to `dir/name` and stdout.
fn emit_json(dir: &Path, name: &str, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    let mut w = writer(dir, name)?;
    writeln!(w, "{text}")?;
    w.flush()?;
    println!("{text}");
    Ok(())
}

fn cplx_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let pot = Potential::from_spec(&a.potential).map_err(usage)?;
    positive("rmax", a.rmax)?;
    positive("tol", a.tol)?;
    let lambdas = a
        .lambda
        .iter()
        .map(|s| parse_complex(s).map_err(|e| Failure::Usage(format!("--lambda: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let g = grid(0.0, a.rmax, a.dr)?;
    prepare_out(&a.out.out)?;
    let mut files = Vec::new();
    for (k, &lambda) in lambdas.iter().enumerate() {
        let path = krein::solve_krein(&pot, lambda, &g, a.tol)?;
        let name = format!("solve_{k}.csv");
        let mut w = writer(&a.out.out, &name)?;
        path.write_csv(&mut w)?;
        w.flush()?;
        files.push(json!({ "lambda": cplx_json(lambda), "file": name }));
    }
    emit_json(
        &a.out.out,
        "solve.json",
        &json!({
            "command": "solve",
            "potential": a.potential,
            "rmax": a.rmax,
            "dr": (a.rmax) / (g.len() - 1) as f64,
            "points": g.len(),
            "tolerance": a.tol,
            "files": files,
        }),
    )
}

fn cmd_entropy(a: EntropyArgs) -> Result<(), Failure> {
    let pot = Potential::from_spec(&a.potential).map_err(usage)?;
    positive("tol", a.tol)?;
    positive("cutoff", a.cutoff)?;
    if !(a.rmin >= 0.0 && a.rmax > a.rmin) {
        return Err(Failure::Usage(format!(
            "need 0 <= rmin < rmax, got {} and {}",
            a.rmin, a.rmax
        )));
    }
    let g = grid(a.rmin, a.rmax, a.dr)?;
    prepare_out(&a.out.out)?;
    let scan = entropy::equivalence_scan(&pot, &g, a.tol)?;
    let mut w = writer(&a.out.out, "entropy.csv")?;
    scan.write_csv(&mut w)?;
    w.flush()?;
    let sum = entropy::entropy_sum(&pot, a.terms, a.tol)?;
    let sob = entropy::sobolev_h_minus1(&pot, a.cutoff)?;
    let (ratio, verdict) = if pot.is_zero() {
        (None, "trivial")
    } else {
        let q = sum.value / sob.value;
        let inside = q >= RATIO_BAND.0 && q <= RATIO_BAND.1;
        (
            Some(q),
            if inside {
                "within_band"
            } else {
                "outside_band"
            },
        )
    };
    emit_json(
        &a.out.out,
        "entropy.json",
        &json!({
            "command": "entropy",
            "potential": a.potential,
            "grid": { "rmin": a.rmin, "rmax": a.rmax, "points": g.len() },
            "tolerance": a.tol,
            "route_tolerance": entropy::ROUTE_TOL,
            "csv": "entropy.csv",
            "alpha_e": scan.fit_e.alpha(),
            "alpha_d": scan.fit_d.alpha(),
            "fit_e": scan.fit_e,
            "fit_d": scan.fit_d,
            "entropy_sum": sum,
            "sobolev_h_minus1": sob,
            "ratio": ratio,
            "band": [RATIO_BAND.0, RATIO_BAND.1],
            "verdict": verdict,
        }),
    )
}

fn cmd_opuc(a: OpucArgs) -> Result<(), Failure> {
    let v = match (&a.seq.alphas, &a.seq.rule) {
        (Some(list), None) => VerblunskySeq::from_list(list)?,
        (None, Some(rule)) => VerblunskySeq::from_rule(rule)?,
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --alphas and --rule".into(),
            ))
        }
    };
    if a.points == 0 {
        return Err(Failure::Usage("--points must be positive".into()));
    }
    prepare_out(&a.out.out)?;
    let mut w = writer(&a.out.out, "opuc_alphas.csv")?;
    v.write_csv(&mut w)?;
    w.flush()?;

    let n = v.len();
    let mut out = csv::Writer::from_writer(writer(&a.out.out, "opuc_recursion.csv")?);
    out.write_record([
        "theta",
        "RePhi",
        "ImPhi",
        "RePhistar",
        "ImPhistar",
        "weight",
    ])?;
    for i in 0..a.points {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / a.points as f64;
        let s = opuc::szego_recursion(&v, Complex64::from_polar(1.0, theta), n);
        let weight = opuc::bs_weight(&v, theta)?;
        out.write_record([
            fmt(theta),
            fmt(s.phi.re),
            fmt(s.phi.im),
            fmt(s.phi_star.re),
            fmt(s.phi_star.im),
            fmt(weight),
        ])?;
    }
    out.flush()?;

    let orders = if a.orders {
        Some(opuc::compare_orders(&v)?)
    } else {
        None
    };
    let order_json = orders.as_ref().map(|o| {
        json!({
            "rho_alpha": o.rho_alpha,
            "rho_pi": o.rho_pi,
            "rho_alpha_value": finite_or_null(o.rho_alpha.value()),
            "rho_pi_value": finite_or_null(o.rho_pi.value()),
            "rho_alpha_polynomial": o.rho_alpha.is_polynomial(),
            "rho_pi_polynomial": o.rho_pi.is_polynomial(),
            "pi_coefficients": o.pi_coefficients,
        })
    });
    emit_json(
        &a.out.out,
        "opuc.json",
        &json!({
            "command": "opuc",
            "sequence": v.to_string(),
            "length": n,
            "lambda_inf": opuc::christoffel_lambda(&v, n),
            "pi_at_zero": opuc::pi_at_zero(&v),
            "files": ["opuc_alphas.csv", "opuc_recursion.csv"],
            "orders": order_json,
        }),
    )
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("infinite")
    }
}

fn fmt(x: f64) -> String {
    kreinlab::report::fmt_num(x)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let report = verify::run(a.seed, a.only.as_deref()).map_err(usage)?;
    prepare_out(&a.out.out)?;
    let value = serde_json::to_value(&report).map_err(|e| Failure::Internal(e.to_string()))?;
    emit_json(&a.out.out, "verify.json", &value)?;
    if report.passed {
        return Ok(());
    }
    let lines: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| {
            let note = c
                .note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default();
            format!(
                "  {} / {}: residual {:e} > {:e}{note}",
                c.group, c.name, c.residual, c.tolerance
            )
        })
        .collect();
    Err(Failure::Verification(format!(
        "{} check(s) failed:\n{}",
        report.failures,
        lines.join("\n")
    )))
}

fn cmd_figure1(a: Figure1Args) -> Result<(), Failure> {
    positive("rmax", a.rmax)?;
    let g = grid(0.0, a.rmax, a.dr)?;
    prepare_out(&a.out.out)?;
    let rows = figure1_table(&g).map_err(|e| Failure::Internal(e.to_string()))?;
    let mut w = writer(&a.out.out, "figure1.csv")?;
    write_figure1_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}
