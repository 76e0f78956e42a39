//! `hypercross`: count, enumerate and bound hyperbolic crosses from the command line.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hypercross::approx::{bernstein_battery, eps_dimension, jackson_battery, log_grid, rate_study};
use hypercross::bounds::sandwich_report;
use hypercross::report::{format_sig, to_json_string};
use hypercross::spde::{run_demo, SpdeConfig};
use hypercross::{brute_force_count, count_cross, BruteBox, enumerate_cross, CrossSpec, ErrorKind, ValidatedSpec};

#[derive(Parser)]
#[command(name = "hypercross", version, about = "Hyperbolic cross index sets: counts, bounds, ε-dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact cardinality with lower and upper bounds.
    Count(CountArgs),
    /// Stream the cross as CSV.
    Enumerate(EnumerateArgs),
    /// Bound report over a list of thresholds.
    Bounds(BoundsArgs),
    /// ε-dimension bracket, optionally with a Jackson/Bernstein battery.
    Epsdim(EpsdimArgs),
    /// ε-dimensions along a logarithmic grid with running slopes.
    Convergence(ConvergenceArgs),
    /// Parametric diffusion demo with Legendre chaos coefficients.
    SpdeDemo(SpdeArgs),
}

#[derive(Args)]
struct SpecArg {
    /// Cross specification (JSON).
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    spec: SpecArg,
    #[arg(long = "T")]
    t: f64,
    /// Depth-first count (the default).
    #[arg(long, conflicts_with = "brute_force")]
    exact: bool,
    /// Scan a bounding box instead.
    #[arg(long)]
    brute_force: bool,
    #[arg(long)]
    dim_cap: Option<u32>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    spec: SpecArg,
    #[arg(long = "T")]
    t: f64,
    /// One row per unsigned index instead of one per s-block.
    #[arg(long)]
    expand: bool,
    #[arg(long)]
    dim_cap: Option<u32>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Comma-separated thresholds.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EpsdimArgs {
    #[command(flatten)]
    spec: SpecArg,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    dim_cap: Option<u32>,
    /// Number of random fields for a Jackson/Bernstein battery at T = 1/eps.
    #[arg(long)]
    battery: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// `first:last:points`, logarithmically spaced and decreasing.
    #[arg(long)]
    eps_grid: String,
    #[arg(long, value_enum, default_value = "json")]
    out: Format,
}

#[derive(Args)]
struct SpdeArgs {
    /// Model configuration (JSON); defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    /// Quadrature nodes per dimension; `max_degree + 4` if omitted.
    #[arg(long)]
    n_q: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<hypercross::Error> for Failure {
    fn from(e: hypercross::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Validation => 1,
            ErrorKind::Hypothesis => 2,
            ErrorKind::Overflow => 3,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::validation(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::validation(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_spec(path: &Path) -> Result<ValidatedSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    Ok(CrossSpec::from_json(&text)?.validate()?)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_line(value: &impl serde::Serialize) -> Result<String, Failure> {
    Ok(to_json_string(value)? + "\n")
}

fn count(args: &CountArgs) -> Outcome {
    let spec = load_spec(&args.spec.spec)?;
    let (method, counted) = if args.brute_force {
        let mut bbox = BruteBox::default_for(&spec, args.t)?;
        if let Some(cap) = args.dim_cap {
            bbox.s_caps.truncate(cap as usize);
        }
        ("brute-force", brute_force_count(&spec, args.t, Some(&bbox))?)
    } else {
        ("exact", count_cross(&spec, args.t, args.dim_cap)?)
    };
    let bounds = sandwich_report(&spec, args.t)?;
    let report = json!({
        "T": args.t,
        "method": method,
        "exact": counted.total,
        "lower": bounds.lower,
        "upper": bounds.upper,
        "hypotheses_ok": bounds.hypotheses_ok,
        "records": counted.records,
        "active_dim": counted.active_dim,
        "dim_cap": args.dim_cap,
    });
    emit(None, &json_line(&report)?)
}

fn join(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(";")
}

fn enumerate(args: &EnumerateArgs) -> Outcome {
    let spec = load_spec(&args.spec.spec)?;
    let walker = enumerate_cross(&spec, args.t, args.dim_cap)?;
    let signed = spec.x_signed || spec.y_signed;
    let mut text = String::new();
    if args.expand {
        for i in 1..=spec.m {
            write!(text, "k{i},").expect("write to string");
        }
        text += if signed { "s_coords,s_vals,multiplicity\n" } else { "s_coords,s_vals\n" };
        for idx in walker.expand() {
            let idx = idx?;
            for k in &idx.k {
                write!(text, "{k},").expect("write to string");
            }
            let entries = idx.s.entries();
            write!(
                text,
                "{},{}",
                join(entries.iter().map(|(j, _)| j.to_string())),
                join(entries.iter().map(|(_, v)| v.to_string()))
            )
            .expect("write to string");
            if signed {
                let nnz_k = idx.k.iter().filter(|&&k| k != 0).count() as u32;
                let mult = (if spec.x_signed { 1u128 << nnz_k } else { 1 })
                    * (if spec.y_signed { 1u128 << entries.len() } else { 1 });
                write!(text, ",{mult}").expect("write to string");
            }
            text.push('\n');
        }
    } else {
        text += "s_coords,s_vals,K,multiplicity\n";
        for rec in walker {
            let rec = rec?;
            let entries = rec.s.entries();
            writeln!(
                text,
                "{},{},{},{}",
                join(entries.iter().map(|(j, _)| j.to_string())),
                join(entries.iter().map(|(_, v)| v.to_string())),
                rec.k_radius,
                rec.expanded_count(spec.m, spec.x_signed)?
            )
            .expect("write to string");
        }
    }
    emit(args.out.as_deref(), &text)
}

fn bounds(args: &BoundsArgs) -> Outcome {
    let spec = load_spec(&args.spec.spec)?;
    let reports = args.t.iter().map(|&t| sandwich_report(&spec, t)).collect::<Result<Vec<_>, _>>()?;
    let text = match args.format {
        Format::Json if reports.len() == 1 => json_line(&reports[0])?,
        Format::Json => json_line(&reports)?,
        Format::Csv => {
            let mut text = String::from("T,lower,exact,upper,hypotheses_ok,constant_used\n");
            for r in &reports {
                let opt = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
                writeln!(
                    text,
                    "{},{},{},{},{},{}",
                    format_sig(r.t),
                    r.lower,
                    r.exact.map(|e| e.to_string()).unwrap_or_default(),
                    opt(r.upper),
                    r.hypotheses_ok,
                    opt(r.constant_used)
                )
                .expect("write to string");
            }
            text
        }
    };
    emit(args.out.as_deref(), &text)?;
    match spec.hypotheses().reason.as_deref() {
        _ if reports.iter().all(|r| r.hypotheses_ok) => Ok(()),
        Some(reason) => Err(Failure { code: 2, message: format!("upper bound not certified: {reason}") }),
        None => Err(Failure { code: 2, message: "upper bound not certified".into() }),
    }
}

fn epsdim(args: &EpsdimArgs) -> Outcome {
    let spec = load_spec(&args.spec.spec)?;
    let dim = eps_dimension(&spec, args.eps, args.dim_cap)?;
    let mut report = json!({ "eps": args.eps, "n": dim.n, "bracket": dim.bracket });
    if let Some(fields) = args.battery {
        let ts = [1.0 / args.eps];
        report["seed"] = json!(args.seed);
        report["jackson"] = serde_json::to_value(jackson_battery(&spec, fields, &ts, args.seed)?)?;
        report["bernstein"] = serde_json::to_value(bernstein_battery(&spec, fields, &ts, args.seed)?)?;
    }
    emit(None, &json_line(&report)?)
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::validation(format!("eps grid `{text}` is not first:last:points"));
    let parts: Vec<&str> = text.split(':').collect();
    let [first, last, n] = parts.as_slice() else { return Err(bad()) };
    let first: f64 = first.parse().map_err(|_| bad())?;
    let last: f64 = last.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    Ok(log_grid(first, last, n)?)
}

fn convergence(args: &ConvergenceArgs) -> Outcome {
    let spec = load_spec(&args.spec.spec)?;
    let study = rate_study(&spec, &parse_grid(&args.eps_grid)?)?;
    let text = match args.out {
        Format::Json => json_line(&study)?,
        Format::Csv => {
            let mut text = String::from("eps,n,slope_running\n");
            for row in &study.rows {
                let slope = row.slope_running.map(format_sig).unwrap_or_default();
                writeln!(text, "{},{},{}", format_sig(row.eps), row.n, slope).expect("write to string");
            }
            text
        }
    };
    emit(None, &text)
}

fn spde_demo(args: &SpdeArgs) -> Outcome {
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)?
        }
        None => SpdeConfig::default(),
    };
    let report = run_demo(&config, args.max_degree, args.n_q)?;
    emit(args.out.as_deref(), &json_line(&report)?)
}

/// Sizes the global worker pool from `HYPERCROSS_THREADS` (0 or unset: automatic).
fn configure_threads() -> Outcome {
    let threads = match std::env::var("HYPERCROSS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::validation(format!("HYPERCROSS_THREADS = `{v}` is not a nonnegative integer")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::validation(e.to_string()))
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Count(a) => count(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Bounds(a) => bounds(a),
        Command::Epsdim(a) => epsdim(a),
        Command::Convergence(a) => convergence(a),
        Command::SpdeDemo(a) => spde_demo(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let lines: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", lines.join(" "));
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
