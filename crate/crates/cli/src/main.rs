//! Command-line front end: norms, level-set scans, limits, strong
//! functionals, maximal functions, sphere constants, weight constants, and
//! the experiment harness, emitting CSV/JSON tables and plot data.
//!
//! Exit codes: 0 success / all assertions pass; 1 any failed assertion;
//! 2 any unreliable quantity; 64 usage error; 65 invalid config, data, or
//! hypothesis violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use bbfs::field::{sample, FunctionSpec, Lattice};
use bbfs::harness::{run_experiment, ExperimentConfig, ExperimentReport};
use bbfs::levelset::{
    lambda_bounds, measure_field, sphere_constant, strong_functional, weak_functional, LambdaGrid,
    LevelSetParams, ScanMode, DEFAULT_LAMBDA_POINTS,
};
use bbfs::operators::{maximal, MaximalConfig, MaximalMode};
use bbfs::spaces::{self, SpaceSpec};
use bbfs::weights::{ap_constant, sample_weight, CubeFamily, WeightSpec};
use bbfs::{Error, GridFunction, Result};

#[derive(Parser)]
#[command(
    name = "bbfs",
    version,
    about = "Numerical workbench for function-space norms, operators, and level-set functionals"
)]
struct Cli {
    /// Worker threads for the parallel kernels (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized experiments (overrides the config value).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a space norm of a sampled function.
    Norm(NormArgs),
    /// λ-scan of the level-set measure: value, reach, and pair count per λ.
    Scan(ScanArgs),
    /// Weak-functional profile with its top-decade limit summary.
    Limit(ScanArgs),
    /// Strong (double-sum) functional of a sampled function.
    Strong(StrongArgs),
    /// Hardy–Littlewood maximal function of a sampled function.
    Maximal(MaximalArgs),
    /// Sphere-moment constant K(q,n): closed form against quadrature.
    Kconst(KconstArgs),
    /// Muckenhoupt A_p constant scan of a weight.
    Apconst(ApconstArgs),
    /// Run a verification experiment from a JSON config.
    Verify(VerifyArgs),
    /// Re-parse an emitted report, print its summary, optionally re-emit CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Brute,
    Accelerated,
}

impl From<Mode> for ScanMode {
    fn from(m: Mode) -> ScanMode {
        match m {
            Mode::Brute => ScanMode::Brute,
            Mode::Accelerated => ScanMode::Accelerated,
        }
    }
}

#[derive(Args)]
struct FieldArgs {
    /// Dimension of the sampling window (1–3).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Nodes per axis.
    #[arg(long, default_value_t = 1025)]
    n: usize,
    /// Half-extent of the sampling window [−w, w]^n.
    #[arg(long, default_value_t = 2.0)]
    window: f64,
    /// Function: hat, smoothed-hat, bump, gaussian, or a FunctionSpec JSON.
    #[arg(long, default_value = "smoothed-hat")]
    function: String,
}

impl FieldArgs {
    fn build(&self) -> Result<(Lattice, GridFunction)> {
        let lat = Lattice::uniform(self.dim, -self.window, self.window, self.n)?;
        let spec = parse_function(&self.function, self.dim)?;
        let f = sample(&spec, &lat)?;
        Ok((lat, f))
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Space: l1, l2, or a SpaceSpec JSON.
    #[arg(long, default_value = "l2")]
    space: String,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Space: l1, l2, or a SpaceSpec JSON.
    #[arg(long, default_value = "l1")]
    space: String,
    /// Integrability exponent of the level-set relation.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Smoothness exponent of the level-set relation.
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Smallest λ (default: the field's validity window).
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Largest λ (default: the field's validity window).
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Points in the geometric λ-grid.
    #[arg(long, default_value_t = DEFAULT_LAMBDA_POINTS)]
    lambda_points: usize,
    /// Pair-scan strategy; both produce identical counts.
    #[arg(long, value_enum, default_value_t = Mode::Accelerated)]
    mode: Mode,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct StrongArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Space: l1, l2, or a SpaceSpec JSON.
    #[arg(long, default_value = "l2")]
    space: String,
    /// Integrability exponent.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Smoothness exponent in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    s: f64,
}

#[derive(Args)]
struct MaximalArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Take the supremum over all balls containing the point, not just
    /// centered ones.
    #[arg(long)]
    uncentered: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct KconstArgs {
    /// Moment exponent q > 0.
    #[arg(long)]
    q: f64,
    /// Sphere dimension parameter n (1–3).
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args)]
struct ApconstArgs {
    /// Weight: a WeightSpec JSON.
    #[arg(long)]
    weight: String,
    /// Muckenhoupt exponent p ≥ 1.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Dimension of the sampling window (1–3).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Nodes per axis.
    #[arg(long, default_value_t = 4097)]
    n: usize,
    /// Half-extent of the sampling window [−w, w]^n.
    #[arg(long, default_value_t = 2.0)]
    window: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override: dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Override: collapse the refinement ladder to this single grid.
    #[arg(long)]
    n: Option<usize>,
    /// Override: integrability exponent q.
    #[arg(long)]
    q: Option<f64>,
    /// Override: smoothness exponent s.
    #[arg(long)]
    s: Option<f64>,
    /// Override: space (l1, l2, or SpaceSpec JSON).
    #[arg(long)]
    space: Option<String>,
    /// Override: function (name or FunctionSpec JSON).
    #[arg(long)]
    function: Option<String>,
    /// Override: smallest λ (needs --lambda-max).
    #[arg(long)]
    lambda_min: Option<f64>,
    /// Override: largest λ (needs --lambda-min).
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Override: points in the λ-grid.
    #[arg(long)]
    lambda_points: Option<usize>,
    /// Report base path: writes <base>.json and <base>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// An emitted report (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Re-emit the convergence table here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_function(text: &str, dim: usize) -> Result<FunctionSpec> {
    if text.trim_start().starts_with('{') {
        let spec: FunctionSpec = serde_json::from_str(text)?;
        spec.validate()?;
        return Ok(spec);
    }
    let center = vec![0.0; dim];
    Ok(match text {
        "hat" => FunctionSpec::Hat {
            center,
            halfwidth: 1.0,
            height: 1.0,
        },
        "smoothed-hat" => FunctionSpec::SmoothedHat {
            center,
            halfwidth: 1.0,
            height: 1.0,
            k: 16,
        },
        "bump" => FunctionSpec::SmoothBump {
            center,
            radius: 1.0,
            height: 1.0,
        },
        "gaussian" => FunctionSpec::GaussianLike {
            center,
            radius: 1.0,
            height: 1.0,
        },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown function '{other}': use hat, smoothed-hat, bump, gaussian, \
                 or a FunctionSpec JSON"
            )))
        }
    })
}

fn parse_space(text: &str) -> Result<SpaceSpec> {
    if text.trim_start().starts_with('{') {
        let spec: SpaceSpec = serde_json::from_str(text)?;
        spec.validate()?;
        return Ok(spec);
    }
    Ok(match text {
        "l1" => SpaceSpec::Lebesgue { p: 1.0 },
        "l2" => SpaceSpec::Lebesgue { p: 2.0 },
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown space '{other}': use l1, l2, or a SpaceSpec JSON"
            )))
        }
    })
}

/// Write to the file when given, stdout otherwise.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run_norm(args: &NormArgs) -> Result<u8> {
    let (_, f) = args.field.build()?;
    let space = parse_space(&args.space)?;
    println!("{}", spaces::norm(&space, &f)?);
    Ok(0)
}

fn scan_grid(args: &ScanArgs, f: &GridFunction, e: f64) -> Result<Vec<f64>> {
    let (min, max) = match (args.lambda_min, args.lambda_max) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => lambda_bounds(f, e)?,
        _ => {
            return Err(Error::InvalidInput(
                "--lambda-min and --lambda-max must be given together".into(),
            ))
        }
    };
    let grid = LambdaGrid {
        min,
        max,
        points: args.lambda_points,
    };
    grid.validate()?;
    Ok(grid.realize())
}

fn run_scan(args: &ScanArgs) -> Result<u8> {
    let (lat, f) = args.field.build()?;
    let space = parse_space(&args.space)?;
    let e = lat.dim() as f64 / args.q + args.s;
    let lambdas = scan_grid(args, &f, e)?;
    let cell = lat.cell_measure();
    let h = lat.max_spacing();
    let bound = 2.0 * f.max_abs();
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let params = LevelSetParams {
            q: args.q,
            s: args.s,
            lambda,
        };
        let m = measure_field(&f, &params, args.mode.into())?;
        let pairs = (m.values.iter().sum::<f64>() / cell).round() as u64;
        let rooted = m.map(|v| v.powf(1.0 / args.q));
        let value = lambda * spaces::norm(&space, &rooted)?;
        let r_max_cells = if bound > 0.0 {
            (bound / lambda).powf(1.0 / e) / h
        } else {
            0.0
        };
        rows.push((lambda, value, r_max_cells, pairs));
    }
    let content = match args.output.format {
        Format::Csv => {
            let mut out = String::from("lambda,value,r_max_cells,pairs\n");
            for (l, v, r, p) in &rows {
                out.push_str(&format!("{l},{v},{r},{p}\n"));
            }
            out
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(l, v, r, p)| {
                    serde_json::json!({
                        "lambda": l, "value": v, "r_max_cells": r, "pairs": p
                    })
                })
                .collect();
            format!("{:#}\n", serde_json::Value::Array(items))
        }
    };
    emit(&args.output.out, &content)?;
    Ok(0)
}

fn run_limit(args: &ScanArgs) -> Result<u8> {
    let (lat, f) = args.field.build()?;
    let space = parse_space(&args.space)?;
    let e = lat.dim() as f64 / args.q + args.s;
    let grid = match (args.lambda_min, args.lambda_max) {
        (None, None) => None,
        _ => {
            let lambdas = scan_grid(args, &f, e)?;
            Some(LambdaGrid {
                min: lambdas[0],
                max: *lambdas.last().unwrap(),
                points: args.lambda_points,
            })
        }
    };
    let profile = weak_functional(&f, &space, args.q, args.s, grid.as_ref())?;
    if let Some(path) = &args.output.out {
        match args.output.format {
            Format::Csv => fs::write(path, profile.to_csv())?,
            Format::Json => fs::write(path, serde_json::to_string_pretty(&profile)?)?,
        }
    }
    println!("{}", profile.summary_json());
    Ok(0)
}

fn run_strong(args: &StrongArgs) -> Result<u8> {
    let (_, f) = args.field.build()?;
    let space = parse_space(&args.space)?;
    println!("{}", strong_functional(&f, &space, args.q, args.s)?);
    Ok(0)
}

fn run_maximal(args: &MaximalArgs) -> Result<u8> {
    let (lat, f) = args.field.build()?;
    let mode = if args.uncentered {
        MaximalMode::Uncentered
    } else {
        MaximalMode::Centered
    };
    let cfg = MaximalConfig::default_for(&lat, mode);
    let m = maximal(&f, &cfg)?;
    let content = match args.output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            m.dump_csv(&mut buf)?;
            String::from_utf8(buf).expect("CSV is ASCII")
        }
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&m)?),
    };
    emit(&args.output.out, &content)?;
    Ok(0)
}

fn run_kconst(args: &KconstArgs) -> Result<u8> {
    let k = sphere_constant(args.q, args.dim)?;
    println!("{}", serde_json::to_string_pretty(&k)?);
    Ok(0)
}

fn run_apconst(args: &ApconstArgs) -> Result<u8> {
    let spec: WeightSpec = serde_json::from_str(&args.weight)?;
    spec.validate()?;
    let lat = Lattice::uniform(args.dim, -args.window, args.window, args.n)?;
    let w = sample_weight(&spec, &lat)?;
    let est = ap_constant(&w, args.p, &CubeFamily::default())?;
    println!("{}", serde_json::to_string_pretty(&est)?);
    Ok(0)
}

fn summary_line(report: &ExperimentReport) -> String {
    let kind = serde_json::to_value(report.config.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_else(|| "experiment".into());
    let mut pass = 0;
    let mut fail = 0;
    let mut unreliable = 0;
    for a in &report.assertions {
        match a.verdict {
            bbfs::harness::Verdict::Pass => pass += 1,
            bbfs::harness::Verdict::Fail => fail += 1,
            bbfs::harness::Verdict::Unreliable => unreliable += 1,
        }
    }
    format!(
        "{kind}: {pass} pass, {fail} fail, {unreliable} unreliable across {} rung(s) in {:.0} ms → exit {}",
        report.rows.len(),
        report.wall_ms_total,
        report.exit_code()
    )
}

fn write_report(report: &ExperimentReport, base: &Path) -> Result<()> {
    let mut json_path = base.as_os_str().to_owned();
    json_path.push(".json");
    let mut csv_path = base.as_os_str().to_owned();
    csv_path.push(".csv");
    fs::write(json_path, report.to_json()?)?;
    fs::write(csv_path, report.to_csv())?;
    Ok(())
}

fn run_verify(args: &VerifyArgs, seed: Option<u64>) -> Result<u8> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Error::InvalidInput(format!("config {}: {e}", args.config.display()))
    })?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)?;
    if let Some(dim) = args.dim {
        config.dim = dim;
    }
    if let Some(n) = args.n {
        config.grids = vec![n];
    }
    if let Some(q) = args.q {
        config.q = Some(q);
    }
    if let Some(s) = args.s {
        config.s = Some(s);
    }
    if let Some(space) = &args.space {
        config.space = Some(parse_space(space)?);
    }
    if let Some(function) = &args.function {
        config.function = Some(parse_function(function, config.dim)?);
    }
    if args.lambda_min.is_some() || args.lambda_max.is_some() || args.lambda_points.is_some() {
        let (min, max) = match (args.lambda_min, args.lambda_max) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvalidInput(
                    "--lambda-min and --lambda-max must be given together".into(),
                ))
            }
        };
        config.lambda = Some(LambdaGrid {
            min,
            max,
            points: args.lambda_points.unwrap_or(DEFAULT_LAMBDA_POINTS),
        });
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let report = run_experiment(&config)?;
    let base = args
        .out
        .clone()
        .or_else(|| report.config.output.as_ref().map(PathBuf::from));
    match &base {
        Some(base) => write_report(&report, base)?,
        None => println!("{}", report.to_json()?),
    }
    println!("{}", summary_line(&report));
    Ok(report.exit_code() as u8)
}

fn run_report(args: &ReportArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Error::InvalidInput(format!("report {}: {e}", args.config.display()))
    })?;
    let report: ExperimentReport = serde_json::from_str(&text)?;
    if let Some(path) = &args.out {
        fs::write(path, report.to_csv())?;
    }
    println!("{}", summary_line(&report));
    Ok(report.exit_code() as u8)
}

fn dispatch(command: &Command, seed: Option<u64>) -> Result<u8> {
    match command {
        Command::Norm(a) => run_norm(a),
        Command::Scan(a) => run_scan(a),
        Command::Limit(a) => run_limit(a),
        Command::Strong(a) => run_strong(a),
        Command::Maximal(a) => run_maximal(a),
        Command::Kconst(a) => run_kconst(a),
        Command::Apconst(a) => run_apconst(a),
        Command::Verify(a) => run_verify(a, seed),
        Command::Report(a) => run_report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let graceful = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if graceful { 0 } else { 64 });
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(65);
        }
    };
    match pool.install(|| dispatch(&cli.command, cli.seed)) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(65)
        }
    }
}
