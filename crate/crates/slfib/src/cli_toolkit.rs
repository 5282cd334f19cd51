//! The `slfib` command line: argument and config parsing, sweep
//! orchestration, and file output.
//!
//! Every subcommand takes its parameters from flags, from a JSON config
//! (`--config run.json`, keys named like the long flags), or both; flags
//! given on the command line win.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::calibration_core::{fiber_points, sl_check, ComplexPoint3, FiberChartPoint, UvSource};
use crate::elliptic_engine::dump::{read_dump, write_dump};
use crate::elliptic_engine::{
    solve_disc_limit, solve_disc_warm, solve_strip_limit, solve_strip_spectral, solve_strip_warm, BoundarySpec,
    ContinuationSchedule, DomainKind, DomainSpec, SolutionField, SpectralSpec,
};
use crate::error::{Result, SlError};
use crate::explicit_models::{na_oracle, na_slice_formulas, Axis, NaModel};
use crate::fibration_factory::{
    alpha_beta_at, disc_zero_counts, find_alpha0_alpha1, project_to_base, ribbon_report, singular_count_profile,
    FamilySpec, SolverCache, ROOT_TOL,
};
use crate::monodromy_graph::{
    invariant_lattice, monodromy_report, ribbon_csv, ribbon_figure_data, standard_negative_vertex,
    standard_positive_vertex, RibbonGeometry,
};
use crate::singularity_lab::analyze;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONISOLATED: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "slfib", version, about = "U(1)-invariant special Lagrangian fibrations of C³")]
pub struct Cli {
    /// JSON object of flag values; flags on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for every file a command writes.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a Dirichlet problem and write the field dump and diagnostics.
    Solve(SolveArgs),
    /// Singular points of a solved or loaded field.
    Classify(ClassifyArgs),
    /// Root curves, zero counts and ribbons along a family.
    Sweep(SweepArgs),
    /// Base coordinates (a, b, c) of a point of C³.
    Project(ProjectArgs),
    /// Points on one fiber.
    FiberSample(FiberArgs),
    /// ω and Im Ω residuals on finite-difference frames of one fiber.
    SlCheck(SlCheckArgs),
    /// Monodromy matrix checks and ribbon figure data.
    Monodromy(MonodromyArgs),
    /// Closed-form (u, v) of the N_a family.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Disc,
    Strip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Disc,
    Strip,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = Kind::Disc)]
    pub kind: Kind,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Disc grid: n radial rings, 2n angles.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    #[arg(long, default_value_t = 129)]
    pub ny: usize,
    /// Strip half-height.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Disc boundary constant term.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub constant: f64,
    /// Disc boundary term `k=v` meaning `v cos kθ`.
    #[arg(long = "cos", value_name = "K=V", allow_negative_numbers = true)]
    pub cos: Vec<String>,
    /// Disc boundary term `k=v` meaning `v sin kθ`.
    #[arg(long = "sin", value_name = "K=V", allow_negative_numbers = true)]
    pub sin: Vec<String>,
    /// Disc boundary `cos 3θ` + α cos θ, replacing the explicit terms.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Strip top edge, e.g. `const=1,cos 1=0.5`.
    #[arg(long, value_name = "SPEC")]
    pub top: Option<String>,
    #[arg(long, value_name = "SPEC")]
    pub bottom: Option<String>,
    /// Final level of the continuation used when `a = 0`.
    #[arg(long, default_value_t = 1e-4)]
    pub a_min: f64,
    /// Strip solve by Fourier–Chebyshev collocation (needs `a ≠ 0`).
    #[arg(long)]
    pub spectral: bool,
    /// Field dump path; defaults to `field.dump` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Load a field dump instead of solving.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Sample the closed-form N_a field on a disc instead of solving.
    #[arg(long)]
    pub oracle: bool,
    /// Upper bound on the winding circle radius.
    #[arg(long, default_value_t = 0.3)]
    pub radius: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Strip family parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Vec<f64>,
    /// Number of α values for the disc family.
    #[arg(long, default_value_t = 40)]
    pub alpha_grid: usize,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub alpha_lo: f64,
    #[arg(long, default_value_t = 3.5, allow_negative_numbers = true)]
    pub alpha_hi: f64,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    #[arg(long, default_value_t = 129)]
    pub ny: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub a_min: f64,
    #[arg(long, default_value_t = ROOT_TOL)]
    pub tol: f64,
    /// Also count singular points at five parameters across each strip ribbon.
    #[arg(long)]
    pub profile: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ProjectArgs {
    #[arg(long, value_enum, default_value_t = Family::Strip)]
    pub family: Family,
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// `re,im`
    #[arg(long, allow_negative_numbers = true)]
    pub z1: String,
    #[arg(long, allow_negative_numbers = true)]
    pub z2: String,
    #[arg(long, allow_negative_numbers = true)]
    pub z3: String,
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    #[arg(long, default_value_t = 129)]
    pub ny: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub a_min: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Source {
    /// `N_{a,c}`.
    Oracle,
    /// `N′_{a,c}`.
    OraclePrime,
    /// A field dump given by `--field`.
    Dump,
    /// A strip solved by collocation from `--top/--bottom`.
    SpectralStrip,
}

#[derive(Args, Debug, Clone)]
pub struct FiberArgs {
    #[arg(long, value_enum, default_value_t = Source::Oracle)]
    pub source: Source,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub a: f64,
    /// `re,im`
    #[arg(long, default_value = "0,0", allow_negative_numbers = true)]
    pub c: String,
    #[arg(long)]
    pub field: Option<PathBuf>,
    #[arg(long, value_name = "SPEC")]
    pub top: Option<String>,
    #[arg(long, value_name = "SPEC")]
    pub bottom: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SlCheckArgs {
    #[command(flatten)]
    pub fiber: FiberArgs,
    #[arg(long, default_value_t = 500)]
    pub frames: usize,
    /// Finite-difference step in the chart.
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VertexChoice {
    Positive,
    Negative,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct MonodromyArgs {
    #[arg(long, value_enum, default_value_t = VertexChoice::Both)]
    pub vertex: VertexChoice,
    /// Print the fixed lattices.
    #[arg(long)]
    pub show_fixed: bool,
    /// Print the transpose duality verdict.
    #[arg(long)]
    pub duality: bool,
    #[arg(long, default_value_t = 2.0)]
    pub spine: f64,
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
    #[arg(long, default_value_t = 0.25)]
    pub overhang: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y: f64,
    /// Write an `n × n` grid over `[-1, 1]²` instead of one point.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Compare against the closed-form axis slices on 100 points.
    #[arg(long)]
    pub slices: bool,
}

/// Run with `args` (including the program name), writing reports to `out`
/// and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match parse_with_config(&argv) {
        Ok(c) => c,
        Err(Failure::Usage(msg, code)) => {
            let _ = if code == 0 { write!(out, "{msg}") } else { write!(err, "{msg}") };
            return code;
        }
        Err(Failure::Op(e)) => {
            let _ = writeln!(err, "error: {}: {e}", e.token());
            return EXIT_USAGE;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.token());
            match e {
                SlError::NonisolatedSingularities => EXIT_NONISOLATED,
                SlError::InvalidInput(_) => EXIT_USAGE,
                _ => EXIT_ERROR,
            }
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args(), &mut stdout.lock(), &mut stderr.lock())
}

enum Failure {
    Usage(String, i32),
    Op(SlError),
}

fn clap_failure(e: clap::Error) -> Failure {
    Failure::Usage(e.render().to_string(), e.exit_code())
}

/// Parse once to learn the subcommand and which flags were typed, then
/// splice the config entries for the remaining flags in after the
/// subcommand name and parse again.
fn parse_with_config(argv: &[String]) -> std::result::Result<Cli, Failure> {
    let cmd = Cli::command();
    let matches = cmd.clone().try_get_matches_from(argv).map_err(clap_failure)?;
    let Some(path) = matches.get_one::<PathBuf>("config").cloned() else {
        return Cli::from_arg_matches(&matches).map_err(clap_failure);
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Op(SlError::Io(format!("{}: {e}", path.display()))))?;
    let cfg: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Op(SlError::InvalidInput(format!("config {}: {e}", path.display()))))?;
    let Value::Object(map) = cfg else {
        return Err(Failure::Op(SlError::InvalidInput("config must be a JSON object".into())));
    };
    let (sub_name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub_cmd = cmd.find_subcommand(sub_name).expect("known subcommand");
    let mut extra = Vec::new();
    for (key, val) in &map {
        let id = key.replace('-', "_");
        let (owner, arg) = match sub_cmd.get_arguments().find(|a| a.get_id().as_str() == id) {
            Some(a) => (sub_matches, a),
            None => match cmd.get_arguments().find(|a| a.get_id().as_str() == id) {
                Some(a) => (&matches, a),
                None => return Err(Failure::Op(SlError::InvalidInput(format!("unknown config key `{key}`")))),
            },
        };
        if id == "config" || owner.value_source(&id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let flag = format!("--{}", arg.get_long().unwrap_or(key));
        push_config_value(&mut extra, &flag, val).map_err(Failure::Op)?;
    }
    let at = argv.iter().position(|a| a == sub_name).expect("subcommand present in argv");
    let mut merged: Vec<String> = argv[..=at].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[at + 1..]);
    Cli::try_parse_from(&merged).map_err(clap_failure)
}

fn push_config_value(out: &mut Vec<String>, flag: &str, val: &Value) -> Result<()> {
    match val {
        Value::Bool(true) => out.push(flag.to_string()),
        Value::Bool(false) | Value::Null => {}
        Value::Number(n) => out.push(format!("{flag}={n}")),
        Value::String(s) => out.push(format!("{flag}={s}")),
        Value::Array(items) => {
            for it in items {
                push_config_value(out, flag, it)?;
            }
        }
        Value::Object(m) => {
            for (k, v) in m {
                let v = v
                    .as_f64()
                    .ok_or_else(|| SlError::InvalidInput(format!("{flag}: expected numeric values")))?;
                out.push(format!("{flag}={k}={v}"));
            }
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if cli.jobs == 0 {
        return Err(SlError::InvalidInput("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Solve(a) => cmd_solve(cli, a, out),
        Command::Classify(a) => cmd_classify(cli, a, out),
        Command::Sweep(a) => cmd_sweep(cli, a, out, err),
        Command::Project(a) => cmd_project(a, out),
        Command::FiberSample(a) => cmd_fiber_sample(cli, a, out),
        Command::SlCheck(a) => cmd_sl_check(a, out),
        Command::Monodromy(a) => cmd_monodromy(cli, a, out),
        Command::Oracle(a) => cmd_oracle(cli, a, out),
    }
}

/// `k=v` with an integer harmonic `k ≥ 1`.
pub fn parse_term(s: &str) -> Result<(u32, f64)> {
    let bad = || SlError::InvalidInput(format!("expected K=V, got `{s}`"));
    let (k, v) = s.split_once('=').ok_or_else(bad)?;
    let k: u32 = k.trim().parse().map_err(|_| bad())?;
    let v: f64 = v.trim().parse().map_err(|_| bad())?;
    if k == 0 || !v.is_finite() {
        return Err(bad());
    }
    Ok((k, v))
}

/// Strip edge data such as `const=1,cos 1=0.5,sin 2=-1`.
pub fn parse_boundary(spec: &str) -> Result<BoundarySpec> {
    let mut b = BoundarySpec::constant(0.0);
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || SlError::InvalidInput(format!("bad boundary term `{tok}`"));
        if let Some(v) = tok.strip_prefix("const=") {
            b.constant = v.trim().parse().map_err(|_| bad())?;
            if !b.constant.is_finite() {
                return Err(bad());
            }
        } else if let Some(rest) = tok.strip_prefix("cos") {
            let (k, v) = parse_term(rest.trim()).map_err(|_| bad())?;
            b = b.with_cos(k, v);
        } else if let Some(rest) = tok.strip_prefix("sin") {
            let (k, v) = parse_term(rest.trim()).map_err(|_| bad())?;
            b = b.with_sin(k, v);
        } else {
            return Err(bad());
        }
    }
    Ok(b)
}

fn parse_complex(s: &str) -> Result<C64> {
    let bad = || SlError::InvalidInput(format!("expected re,im, got `{s}`"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

fn disc_boundary(a: &SolveArgs) -> Result<BoundarySpec> {
    if let Some(alpha) = a.alpha {
        return Ok(BoundarySpec::vhat(alpha));
    }
    let mut b = BoundarySpec::constant(a.constant);
    for t in &a.cos {
        let (k, v) = parse_term(t)?;
        b = b.with_cos(k, v);
    }
    for t in &a.sin {
        let (k, v) = parse_term(t)?;
        b = b.with_sin(k, v);
    }
    Ok(b)
}

fn strip_edges(top: &Option<String>, bottom: &Option<String>) -> Result<(BoundarySpec, BoundarySpec)> {
    let top = top
        .as_deref()
        .ok_or_else(|| SlError::InvalidInput("strip needs --top".into()))?;
    let top = parse_boundary(top)?;
    let bottom = match bottom {
        Some(s) => parse_boundary(s)?,
        None => top.clone(),
    };
    Ok((top, bottom))
}

fn schedule(a_min: f64) -> Result<ContinuationSchedule> {
    if !(a_min > 0.0 && a_min < 1.0) {
        return Err(SlError::InvalidInput("--a-min must lie in (0, 1)".into()));
    }
    Ok(ContinuationSchedule::geometric(1.0, a_min))
}

fn strip_domain(r: f64, nx: usize, ny: usize) -> Result<DomainSpec> {
    let d = DomainSpec::strip(r, 2.0 * PI, nx, ny);
    d.validate()?;
    Ok(d)
}

fn disc_domain(n: usize) -> Result<DomainSpec> {
    let d = DomainSpec::disc(n);
    d.validate()?;
    Ok(d)
}

/// The field a [`SolveArgs`] describes.
pub fn solve_field(a: &SolveArgs) -> Result<SolutionField> {
    if !a.a.is_finite() {
        return Err(SlError::InvalidInput("non-finite a".into()));
    }
    match a.kind {
        Kind::Disc => {
            let phi = disc_boundary(a)?;
            let d = disc_domain(a.n)?;
            if a.a == 0.0 {
                solve_disc_limit(&phi, &d, &schedule(a.a_min)?)
            } else {
                solve_disc_warm(&phi, a.a, &d, None)
            }
        }
        Kind::Strip => {
            let (top, bottom) = strip_edges(&a.top, &a.bottom)?;
            let d = strip_domain(a.r, a.nx, a.ny)?;
            if a.spectral {
                let spec = SpectralSpec {
                    r: a.r,
                    ..SpectralSpec::default()
                };
                return solve_strip_spectral(&top, &bottom, a.a, &spec)?.to_solution_field(&d);
            }
            if a.a == 0.0 {
                solve_strip_limit(&top, &bottom, &d, &schedule(a.a_min)?)
            } else {
                solve_strip_warm(&top, &bottom, a.a, &d, None)
            }
        }
    }
}

fn out_path(cli: &Cli, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&cli.out_dir)?;
    Ok(cli.out_dir.join(name))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| SlError::Io(e.to_string()))?;
    fs::write(path, s + "\n")?;
    Ok(())
}

fn to_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| SlError::Io(e.to_string()))
}

fn cmd_solve(cli: &Cli, a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let field = solve_field(a)?;
    let dump = match &a.out {
        Some(p) => p.clone(),
        None => out_path(cli, "field.dump")?,
    };
    let mut file = std::io::BufWriter::new(fs::File::create(&dump)?);
    write_dump(&field, &mut file)?;
    file.flush()?;
    let diag = json!({
        "kind": field.domain.kind,
        "a": field.a,
        "converged": field.converged,
        "residual_norm": field.residual_norm,
        "newton_iterations": field.diagnostics.newton_iterations,
        "cauchy_increments": field.diagnostics.cauchy_increments,
        "coefficient_guard_active": field.diagnostics.coefficient_guard_active,
        "periodicity_defect": field.diagnostics.periodicity_defect,
        "limit_proxy": field.diagnostics.limit_proxy,
    });
    let diag_path = out_path(cli, "diagnostics.json")?;
    write_json(&diag_path, &diag)?;
    writeln!(out, "{}", to_line(&diag)?)?;
    Ok(EXIT_OK)
}

fn classify_field(a: &ClassifyArgs) -> Result<SolutionField> {
    if let Some(p) = &a.field {
        let f = fs::File::open(p).map_err(|e| SlError::Io(format!("{}: {e}", p.display())))?;
        return read_dump(BufReader::new(f));
    }
    if a.oracle {
        let d = disc_domain(a.solve.n)?;
        let level = a.solve.a;
        let err = std::cell::RefCell::new(None);
        let f = SolutionField::from_fn(d, level, |x, y| {
            na_oracle(level, x, y).unwrap_or_else(|e| {
                *err.borrow_mut() = Some(e);
                (f64::NAN, f64::NAN)
            })
        })?;
        return match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(f),
        };
    }
    solve_field(&a.solve)
}

fn cmd_classify(cli: &Cli, a: &ClassifyArgs, out: &mut dyn Write) -> Result<i32> {
    let field = classify_field(a)?;
    let report = analyze(&field, a.radius)?;
    write_json(&out_path(cli, "singularities.json")?, &report)?;
    writeln!(out, "{}", to_line(&report)?)?;
    Ok(match report.bound_ok {
        Some(false) => EXIT_CHECK_FAILED,
        _ => EXIT_OK,
    })
}

/// Split `items` into at most `jobs` contiguous chunks, run `work` on each
/// in its own thread, and concatenate the results in order.
fn par_chunks<T: Sync, R: Send>(items: &[T], jobs: usize, work: impl Fn(&[T]) -> Vec<R> + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return work(items);
    }
    let size = items.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(size).map(|c| s.spawn(|| work(c))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

fn error_record(e: &SlError) -> Value {
    json!({ "error": e.token(), "message": e.to_string() })
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let sched = schedule(a.a_min)?;
    let cache = SolverCache::global();
    let mut lines: Vec<Value> = Vec::new();
    let mut csv = String::new();
    let mut failures = 0usize;
    match a.family {
        Family::Strip => {
            if a.t.is_empty() {
                return Err(SlError::InvalidInput("--t needs at least one value".into()));
            }
            let d = strip_domain(1.0, a.nx, a.ny)?;
            csv.push_str("t,alpha_t,beta_t\n");
            let rows = par_chunks(&a.t, cli.jobs, |ts| {
                ts.iter()
                    .map(|&t| {
                        let res = alpha_beta_at(t, &d, &sched, cache, a.tol).and_then(|ab| {
                            let fam = FamilySpec::strip(t, d, sched.clone());
                            let ribbon = ribbon_report(&fam, ab.alpha, ab.beta)?;
                            let counts = if a.profile && t > 0.0 {
                                let w = 0.5 * (ab.beta - ab.alpha);
                                let bs = [ab.alpha - 0.1 * w, ab.alpha, 0.5 * (ab.alpha + ab.beta), ab.beta, ab.beta + 0.1 * w];
                                Some(singular_count_profile(&fam, cache, &bs)?)
                            } else {
                                None
                            };
                            Ok((ab, ribbon, counts))
                        });
                        (t, res)
                    })
                    .collect()
            });
            for (t, res) in rows {
                match res {
                    Ok((ab, ribbon, counts)) => {
                        csv.push_str(&format!("{},{},{}\n", t, ab.alpha, ab.beta));
                        let mut rec = json!({ "t": t, "roots": { "alpha": ab.alpha, "beta": ab.beta }, "ribbon": ribbon });
                        if let Some(c) = counts {
                            rec["counts"] = json!(c);
                        }
                        lines.push(rec);
                    }
                    Err(e) => {
                        failures += 1;
                        let mut rec = error_record(&e);
                        rec["t"] = json!(t);
                        lines.push(rec);
                    }
                }
            }
        }
        Family::Disc => {
            if a.alpha_grid < 2 || !(a.alpha_lo < a.alpha_hi) {
                return Err(SlError::InvalidInput("need --alpha-grid ≥ 2 and --alpha-lo < --alpha-hi".into()));
            }
            let fam = FamilySpec::disc(disc_domain(a.n)?, sched.clone());
            let step = (a.alpha_hi - a.alpha_lo) / (a.alpha_grid - 1) as f64;
            let alphas: Vec<f64> = (0..a.alpha_grid).map(|i| a.alpha_lo + step * i as f64).collect();
            csv.push_str("alpha,zero_count\n");
            let counts = par_chunks(&alphas, cli.jobs, |chunk| {
                chunk
                    .iter()
                    .map(|&al| (al, disc_zero_counts(&fam, cache, &[al]).map(|v| v[0].1)))
                    .collect()
            });
            let mut ok_counts = Vec::new();
            for (al, res) in counts {
                match res {
                    Ok(c) => {
                        csv.push_str(&format!("{al},{c}\n"));
                        lines.push(json!({ "alpha": al, "counts": c }));
                        ok_counts.push((al, c));
                    }
                    Err(e) => {
                        failures += 1;
                        let mut rec = error_record(&e);
                        rec["alpha"] = json!(al);
                        lines.push(rec);
                    }
                }
            }
            match find_alpha0_alpha1(&fam, cache, a.tol) {
                Ok((a0, a1)) => {
                    let ribbon = ribbon_report(&fam, a0, a1)?;
                    let consistent = grid_consistent(&ok_counts, a0, a1);
                    lines.push(json!({
                        "roots": { "alpha0": a0, "alpha1": a1 },
                        "ribbon": ribbon,
                        "grid_consistent": consistent,
                    }));
                    if !consistent {
                        failures += 1;
                    }
                }
                Err(e) => {
                    failures += 1;
                    lines.push(error_record(&e));
                }
            }
        }
    }
    let mut nd = String::new();
    for l in &lines {
        nd.push_str(&to_line(l)?);
        nd.push('\n');
    }
    fs::write(out_path(cli, "sweep.ndjson")?, &nd)?;
    fs::write(out_path(cli, "sweep.csv")?, &csv)?;
    out.write_all(nd.as_bytes())?;
    if failures > 0 {
        writeln!(err, "sweep: {failures} point(s) failed")?;
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

/// Grid points strictly inside `(α₀, α₁)` carry two interior zeros and
/// those outside `[α₀, α₁]` none.
pub fn grid_consistent(counts: &[(f64, usize)], a0: f64, a1: f64) -> bool {
    counts.iter().all(|&(al, c)| {
        if al > a0 && al < a1 {
            c == 2
        } else if al < a0 || al > a1 {
            c == 0
        } else {
            true
        }
    })
}

fn cmd_project(a: &ProjectArgs, out: &mut dyn Write) -> Result<i32> {
    let p = ComplexPoint3::new(parse_complex(&a.z1)?, parse_complex(&a.z2)?, parse_complex(&a.z3)?);
    let sched = schedule(a.a_min)?;
    let fam = match a.family {
        Family::Disc => FamilySpec::disc(disc_domain(a.n)?, sched),
        Family::Strip => FamilySpec::strip(a.t, strip_domain(1.0, a.nx, a.ny)?, sched),
    };
    let coords = project_to_base(&p, &fam, SolverCache::global(), a.tol)?;
    writeln!(out, "{}", to_line(&coords)?)?;
    Ok(EXIT_OK)
}

/// A `(u, v)` source and the chart box its samples are drawn from.
struct FiberSource {
    src: Box<dyn UvSource>,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

fn fiber_source(a: &FiberArgs) -> Result<FiberSource> {
    let c = parse_complex(&a.c)?;
    match a.source {
        Source::Oracle | Source::OraclePrime => {
            let m = if a.source == Source::Oracle {
                NaModel::new(a.a, c)
            } else {
                NaModel::primed(a.a, c)
            };
            Ok(FiberSource {
                src: Box::new(m),
                x_range: (c.re - 2.0, c.re + 2.0),
                y_range: (-2.0, 2.0),
            })
        }
        Source::Dump => {
            let p = a
                .field
                .as_ref()
                .ok_or_else(|| SlError::InvalidInput("--source dump needs --field".into()))?;
            let f = read_dump(BufReader::new(fs::File::open(p)?))?;
            let (x_range, y_range) = match f.domain.kind {
                DomainKind::Disc => ((-0.7, 0.7), (-0.7, 0.7)),
                DomainKind::PeriodicStrip => ((0.0, f.domain.p), (-0.9 * f.domain.r, 0.9 * f.domain.r)),
            };
            Ok(FiberSource {
                src: Box::new(f),
                x_range,
                y_range,
            })
        }
        Source::SpectralStrip => {
            let (top, bottom) = strip_edges(&a.top, &a.bottom)?;
            let spec = SpectralSpec::default();
            let f = solve_strip_spectral(&top, &bottom, a.a, &spec)?;
            Ok(FiberSource {
                src: Box::new(f),
                x_range: (0.0, spec.p),
                y_range: (-0.9 * spec.r, 0.9 * spec.r),
            })
        }
    }
}

fn chart_samples(fs: &FiberSource, n: usize, seed: u64) -> Vec<FiberChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let level = fs.src.level();
    (0..n)
        .map(|_| {
            let x = rng.random_range(fs.x_range.0..fs.x_range.1);
            let y = rng.random_range(fs.y_range.0..fs.y_range.1);
            let phase = rng.random_range(0.0..2.0 * PI);
            FiberChartPoint::new(x, y, phase, level)
        })
        .collect()
}

fn cmd_fiber_sample(cli: &Cli, a: &FiberArgs, out: &mut dyn Write) -> Result<i32> {
    let fs_ = fiber_source(a)?;
    let mut rows = Vec::with_capacity(a.samples);
    for ch in chart_samples(&fs_, a.samples, a.seed) {
        let p = fiber_points(fs_.src.as_ref(), &ch)?;
        rows.push((ch, p));
    }
    match cli.format {
        Format::Csv => {
            let mut s = String::from("x,y,phase,z1_re,z1_im,z2_re,z2_im,z3_re,z3_im\n");
            for (ch, p) in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    ch.x, ch.y, ch.phase, p.z1.re, p.z1.im, p.z2.re, p.z2.im, p.z3.re, p.z3.im
                ));
            }
            let path = out_path(cli, "fiber.csv")?;
            fs::write(&path, s)?;
            writeln!(out, "{}", path.display())?;
        }
        Format::Json => {
            let v: Vec<Value> = rows.iter().map(|(ch, p)| json!({ "chart": ch, "point": p })).collect();
            let path = out_path(cli, "fiber.json")?;
            write_json(&path, &v)?;
            writeln!(out, "{}", path.display())?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SlReport {
    frames: usize,
    skipped: usize,
    max_omega: f64,
    max_imomega: f64,
    tol: f64,
    pass: bool,
}

fn cmd_sl_check(a: &SlCheckArgs, out: &mut dyn Write) -> Result<i32> {
    let fs_ = fiber_source(&a.fiber)?;
    let (mut w, mut im, mut skipped) = (0.0f64, 0.0f64, 0usize);
    for ch in chart_samples(&fs_, a.frames, a.fiber.seed) {
        match sl_check(fs_.src.as_ref(), &ch, a.h)? {
            Some(s) => {
                w = w.max(s.omega);
                im = im.max(s.imomega);
            }
            None => skipped += 1,
        }
    }
    let rep = SlReport {
        frames: a.frames,
        skipped,
        max_omega: w,
        max_imomega: im,
        tol: a.tol,
        pass: w < a.tol && im < a.tol,
    };
    writeln!(out, "{}", to_line(&rep)?)?;
    Ok(if rep.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_monodromy(cli: &Cli, a: &MonodromyArgs, out: &mut dyn Write) -> Result<i32> {
    let report = monodromy_report();
    let geom = RibbonGeometry {
        spine_length: a.spine,
        width: a.width,
        overhang: a.overhang,
    };
    if !(geom.spine_length > 0.0 && geom.width >= 0.0 && geom.overhang >= 0.0) {
        return Err(SlError::InvalidInput("ribbon lengths must be non-negative".into()));
    }
    let vertices: Vec<(&str, _)> = match a.vertex {
        VertexChoice::Positive => vec![("positive", standard_positive_vertex())],
        VertexChoice::Negative => vec![("negative", standard_negative_vertex())],
        VertexChoice::Both => vec![
            ("positive", standard_positive_vertex()),
            ("negative", standard_negative_vertex()),
        ],
    };
    let mut summary = json!({
        "edge": { "det": report.edge_det, "unipotent": report.edge_unipotent },
        "positive": {
            "dets": report.positive_dets,
            "product_is_identity": report.positive_consistent,
            "swapped_product": report.positive_swapped_product,
        },
        "negative": {
            "dets": report.negative_dets,
            "product_is_identity": report.negative_consistent,
            "swapped_product": report.negative_swapped_product,
        },
        "all_unipotent": report.all_unipotent,
        "all_pass": report.all_pass(),
    });
    if a.duality {
        summary["duality"] = json!(report.duality);
    }
    if a.show_fixed {
        for (name, v) in &vertices {
            summary["fixed"][*name] = json!(invariant_lattice(v));
        }
    }
    let mut files = Vec::new();
    for (name, v) in &vertices {
        let path = out_path(cli, &format!("ribbon_{name}.csv"))?;
        fs::write(&path, ribbon_csv(&ribbon_figure_data(v, &geom)))?;
        files.push(path.display().to_string());
    }
    summary["figure_files"] = json!(files);
    write_json(&out_path(cli, "monodromy.json")?, &report)?;
    writeln!(out, "{}", to_line(&summary)?)?;
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_oracle(cli: &Cli, a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    if a.slices {
        let mut worst = 0.0f64;
        for i in 0..100 {
            let s = -2.0 + 4.0 * i as f64 / 99.0;
            let (u, _) = na_oracle(a.a, 0.0, s)?;
            let (_, v) = na_oracle(a.a, s, 0.0)?;
            worst = worst.max((u - na_slice_formulas(a.a, s, Axis::U)).abs());
            worst = worst.max((v - na_slice_formulas(a.a, s, Axis::V)).abs());
        }
        writeln!(out, "{}", to_line(&json!({ "a": a.a, "max_slice_error": worst }))?)?;
        return Ok(if worst < 1e-10 { EXIT_OK } else { EXIT_CHECK_FAILED });
    }
    if let Some(n) = a.grid {
        if n < 2 {
            return Err(SlError::InvalidInput("--grid needs at least 2 points".into()));
        }
        let mut s = String::from("x,y,u,v\n");
        for j in 0..n {
            for i in 0..n {
                let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let y = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                let (u, v) = na_oracle(a.a, x, y)?;
                s.push_str(&format!("{x},{y},{u},{v}\n"));
            }
        }
        let path = out_path(cli, "oracle.csv")?;
        fs::write(&path, s)?;
        writeln!(out, "{}", path.display())?;
        return Ok(EXIT_OK);
    }
    let (u, v) = na_oracle(a.a, a.x, a.y)?;
    writeln!(out, "{}", to_line(&json!({ "a": a.a, "x": a.x, "y": a.y, "u": u, "v": v }))?)?;
    Ok(EXIT_OK)
}
