//! Command-line front end. Every verb is a thin wrapper over library calls;
//! `--json` switches the report to the machine form.
//!
//! Exit codes: 0 success or verified, 1 refuted or invalid input function,
//! 2 usage or parse error, 3 capped or indeterminate.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::builtins::{builtin_1d, builtin_function, builtin_spec, Builtin};
use crate::compiler::{compile_1d, compile_1d_leaderless, compile_spec, CompileError};
use crate::crn::{parse_crn, Crn};
use crate::funcspec::json::spec_from_json;
use crate::funcspec::{extract_eventual_1d, FuncError, ObliviousSpec, Semilinear1D, SpecViolation};
use crate::simulator::{convergence_stats, gnuplot_data, simulate, Trace};
use crate::verifier::{dickson_search, verify_window, Caps, Status};

type BoxedFn = Box<dyn Fn(&[u64]) -> u64 + Sync>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPPED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid function: {0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_REFUTED,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "oblivious-crn",
    version,
    about = "Compile, verify and simulate output-oblivious CRNs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile a function spec into a CRN.
    Compile(FunctionArgs),
    /// Compile a 1D semilinear function with a leader.
    #[command(name = "compile-1d")]
    Compile1d(OneDArgs),
    /// Compile a superadditive 1D function without a leader.
    #[command(name = "compile-1d-leaderless")]
    Compile1dLeaderless(OneDArgs),
    /// Exhaustively verify a CRN against a function on a window.
    Verify(VerifyArgs),
    /// Run seeded stochastic simulations.
    Simulate(SimulateArgs),
    /// Report whether a CRN is output-oblivious and output-monotonic.
    #[command(name = "check-oblivious")]
    CheckOblivious(CrnArgs),
    /// Print the eventual periodic form of a 1D function.
    #[command(name = "extract-1d")]
    Extract1d(OneDArgs),
    /// Search for a decreasing-difference chain.
    Dickson(DicksonArgs),
    /// Print the gradients of the scaling limit of a spec.
    #[command(name = "scaling-limit")]
    ScalingLimit(FunctionArgs),
}

#[derive(Debug, Args)]
struct FunctionArgs {
    /// JSON function spec.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Builtin spec, or the intended function checked against `--spec`.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct OneDArgs {
    /// JSON 1D semilinear function.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    /// Superadditivity is checked on `[0, bound]` (raised as needed).
    #[arg(long, default_value_t = 64)]
    bound: u64,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CrnArgs {
    #[arg(long)]
    crn: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    crn: PathBuf,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    /// Per-axis inclusive bounds, e.g. `4,4`; one value broadcasts.
    #[arg(long, default_value = "4")]
    window: String,
    /// `configs,count`; defaults to the environment, then built-in limits.
    #[arg(long)]
    caps: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    crn: PathBuf,
    /// Input vector, e.g. `3,5`.
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of runs, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: u64,
    /// Intended function; enables the correctness summary.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
    /// CSV of the first trace.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// gnuplot data blocks, one per run.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct DicksonArgs {
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    bound: u64,
    /// Dimension for builtins that take any number of inputs.
    #[arg(long, default_value_t = 2)]
    dimension: usize,
    #[arg(long)]
    json: bool,
}

/// Run with `args` (without the program name) and return the exit code.
pub fn run<S: AsRef<str>>(args: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let argv = std::iter::once("oblivious-crn").chain(args.iter().map(|s| s.as_ref()));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Compile(a) => cmd_compile(a, out),
        Command::Compile1d(a) => cmd_compile_1d(a, false, out),
        Command::Compile1dLeaderless(a) => cmd_compile_1d(a, true, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::CheckOblivious(a) => cmd_check_oblivious(a, out),
        Command::Extract1d(a) => cmd_extract_1d(a, out),
        Command::Dickson(a) => cmd_dickson(a, out),
        Command::ScalingLimit(a) => cmd_scaling_limit(a, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn emit_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), CliError> {
    emit(
        out,
        &format!("{}\n", serde_json::to_string_pretty(v).expect("json value")),
    )
}

fn builtin(name: &str) -> Result<Builtin, CliError> {
    builtin_function(name).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn read_crn(path: &Path) -> Result<Crn, CliError> {
    parse_crn(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Strict parse, then bounded validation on the spec's default window. With
/// a reference, pieces must dominate and the spec must agree with it.
pub fn parse_spec_file(path: &Path, reference: Option<&Builtin>) -> Result<ObliviousSpec, CliError> {
    let spec = spec_from_json(&read(path)?).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    validate_spec(&spec, reference)?;
    Ok(spec)
}

fn validate_spec(spec: &ObliviousSpec, reference: Option<&Builtin>) -> Result<(), CliError> {
    if let Some(b) = reference {
        if b.dimension.is_some_and(|d| d != spec.dimension()) {
            return Err(CliError::Usage(format!(
                "builtin {} takes {} inputs, spec has {}",
                b.name,
                b.dimension.unwrap_or(0),
                spec.dimension()
            )));
        }
    }
    let eval = reference.map(|b| move |x: &[u64]| Some(b.call(x) as i64));
    let r = eval.as_ref().map(|f| f as &dyn Fn(&[u64]) -> Option<i64>);
    spec.validate(spec.default_window(), r)
        .map_err(|v: SpecViolation| CliError::Invalid(v.to_string()))
}

fn read_1d(path: &Path) -> Result<Semilinear1D, CliError> {
    let text = read(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: format!("{}: {}", pointer(e.path()), e.inner()),
    })
}

fn pointer(p: &serde_path_to_error::Path) -> String {
    let s = p.to_string();
    if s == "." {
        "/".into()
    } else {
        format!("/{}", s.replace('.', "/"))
    }
}

fn function_1d(input: &Option<PathBuf>, name: &Option<String>) -> Result<Semilinear1D, CliError> {
    match (input, name) {
        (Some(p), None) => read_1d(p),
        (None, Some(n)) => builtin_1d(n).map_err(|e| CliError::Usage(e.to_string())),
        _ => Err(CliError::Usage("give exactly one of --input or --builtin".into())),
    }
}

fn parse_vector(s: &str, what: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("{what} must be comma-separated naturals, got `{s}`")))
}

/// Comma-separated per-axis bounds; a single value is used on every axis.
pub fn parse_window(s: &str, dimension: usize) -> Result<Vec<u64>, CliError> {
    let w = parse_vector(s, "--window")?;
    match w.len() {
        1 => Ok(vec![w[0]; dimension]),
        n if n == dimension => Ok(w),
        n => Err(CliError::Usage(format!(
            "--window has {n} bounds for {dimension} inputs"
        ))),
    }
}

fn compile_error(e: CompileError) -> CliError {
    match e {
        CompileError::Crn(c) => CliError::Usage(c.to_string()),
        other => CliError::Invalid(other.to_string()),
    }
}

fn deliver(text: &str, output: &Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(p) => write_file(p, text),
        None => emit(out, text),
    }
}

fn crn_json(crn: &Crn) -> serde_json::Value {
    json!({
        "crn": crn.to_string(),
        "species": crn.species().len(),
        "reactions": crn.reactions().len(),
        "leader": crn.leader_name(),
        "output_oblivious": crn.is_output_oblivious(),
    })
}

fn cmd_compile(a: FunctionArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = spec_arg(&a)?;
    let crn = compile_spec(&spec).map_err(compile_error)?;
    if a.json {
        let mut v = crn_json(&crn);
        if let Some(p) = &a.output {
            write_file(p, &crn.to_string())?;
            v["written"] = json!(p);
        }
        emit_json(out, &v)?;
    } else {
        deliver(&crn.to_string(), &a.output, out)?;
    }
    Ok(EXIT_OK)
}

fn spec_arg(a: &FunctionArgs) -> Result<ObliviousSpec, CliError> {
    match (&a.spec, &a.builtin) {
        (Some(p), b) => {
            let reference = b.as_deref().map(builtin).transpose()?;
            parse_spec_file(p, reference.as_ref())
        }
        (None, Some(n)) => {
            let spec = builtin_spec(n).map_err(|e| CliError::Usage(e.to_string()))?;
            validate_spec(&spec, Some(&builtin(n)?))?;
            Ok(spec)
        }
        (None, None) => Err(CliError::Usage("give --spec or --builtin".into())),
    }
}

fn cmd_compile_1d(a: OneDArgs, leaderless: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = function_1d(&a.input, &a.builtin)?;
    let crn = if leaderless {
        compile_1d_leaderless(&f, a.bound)
    } else {
        compile_1d(&f)
    }
    .map_err(compile_error)?;
    if a.json {
        emit_json(out, &crn_json(&crn))?;
    } else {
        deliver(&crn.to_string(), &a.output, out)?;
    }
    Ok(EXIT_OK)
}

fn cmd_extract_1d(a: OneDArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let f = function_1d(&a.input, &a.builtin)?;
    let e = extract_eventual_1d(&f).map_err(|e| CliError::Invalid(e.to_string()))?;
    let tight = e.minimal_seam();
    if a.json {
        emit_json(out, &json!({ "extracted": e, "minimal_seam": tight }))?;
    } else {
        let show = |e: &crate::funcspec::Eventual1DForm| {
            format!("n={} p={} prefix={:?} deltas={:?}", e.n, e.p, e.prefix, e.deltas)
        };
        emit(
            out,
            &format!("extracted:    {}\nminimal seam: {}\n", show(&e), show(&tight)),
        )?;
    }
    Ok(EXIT_OK)
}

/// The intended function for a CRN: a spec (evaluated ahead of time on
/// the points needed) or a builtin.
fn target(
    spec: &Option<PathBuf>,
    name: &Option<String>,
    dimension: usize,
    points: &[Vec<u64>],
) -> Result<BoxedFn, CliError> {
    match (spec, name) {
        (Some(p), None) => {
            let s = parse_spec_file(p, None)?;
            if s.dimension() != dimension {
                return Err(CliError::Usage(format!(
                    "spec has {} inputs, CRN has {dimension}",
                    s.dimension()
                )));
            }
            let mut table = HashMap::new();
            for x in points {
                let v = s
                    .eval(x)
                    .map_err(|e: FuncError| CliError::Invalid(e.to_string()))?;
                table.insert(x.clone(), v);
            }
            Ok(Box::new(move |x| table[x]))
        }
        (None, Some(n)) => {
            let b = builtin(n)?;
            if b.dimension.is_some_and(|d| d != dimension) {
                return Err(CliError::Usage(format!(
                    "builtin {n} does not take {dimension} inputs"
                )));
            }
            Ok(Box::new(move |x| b.call(x)))
        }
        _ => Err(CliError::Usage("give exactly one of --spec or --builtin".into())),
    }
}

fn caps_arg(s: &Option<String>) -> Result<Caps, CliError> {
    match s {
        Some(s) => Caps::parse(s),
        None => Caps::from_env(),
    }
    .map_err(CliError::Usage)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let crn = read_crn(&a.crn)?;
    let window = parse_window(&a.window, crn.dimension())?;
    let caps = caps_arg(&a.caps)?;
    let points = crate::verifier::window_points(&window);
    let f = target(&a.spec, &a.builtin, crn.dimension(), &points)?;
    let report = verify_window(&crn, &*f, &window, caps).map_err(|e| CliError::Usage(e.to_string()))?;
    if a.json {
        emit_json(out, &report.to_json(&crn))?;
    } else {
        let mut text = format!("{}\n", report.summary());
        text.push_str(&format!(
            "largest reachable set: {} configurations\n",
            report.max_graph_size()
        ));
        if let Some(e) = report.first_failure() {
            text.push_str(&format!("input {:?}: {}\n", e.input, e.verdict.detail));
            for line in e.verdict.witness_lines(&crn) {
                text.push_str(&format!("  {line}\n"));
            }
        }
        emit(out, &text)?;
    }
    Ok(match report.status() {
        Status::Verified => EXIT_OK,
        Status::Refuted => EXIT_REFUTED,
        Status::Capped => EXIT_CAPPED,
    })
}

const SHOWN_RUNS: usize = 5;

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let crn = read_crn(&a.crn)?;
    let x = parse_vector(&a.x, "--x")?;
    if x.len() != crn.dimension() {
        return Err(CliError::Usage(format!(
            "--x has {} entries, CRN has {} inputs",
            x.len(),
            crn.dimension()
        )));
    }
    if a.runs == 0 || a.max_steps == 0 {
        return Err(CliError::Usage("--runs and --max-steps must be positive".into()));
    }
    let seeds: Vec<u64> = (0..a.runs).map(|k| a.seed.wrapping_add(k)).collect();
    let traces: Vec<Trace> = seeds
        .iter()
        .map(|&s| simulate(&crn, &x, s, a.max_steps))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(p) = &a.output {
        write_file(p, &traces[0].to_csv())?;
    }
    if let Some(p) = &a.plot {
        write_file(p, &gnuplot_data(&crn, &x, &traces))?;
    }
    let runs: Vec<serde_json::Value> = traces
        .iter()
        .map(|t| {
            json!({
                "seed": t.seed,
                "steps": t.steps.len(),
                "converged": t.converged,
                "output": crn.output_count(&t.terminal),
                "terminal": crn.format_configuration(&t.terminal),
            })
        })
        .collect();

    let stats = if a.spec.is_some() || a.builtin.is_some() {
        let f = target(&a.spec, &a.builtin, crn.dimension(), std::slice::from_ref(&x))?;
        Some(
            convergence_stats(&crn, &x, &*f, &seeds, a.max_steps)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        )
    } else {
        None
    };

    if a.json {
        emit_json(out, &json!({ "runs": runs, "stats": stats }))?;
    } else {
        let mut text = String::new();
        for t in traces.iter().take(SHOWN_RUNS) {
            text.push_str(&format!(
                "seed {}: {} steps, {}, {} = {}\n",
                t.seed,
                t.steps.len(),
                if t.converged {
                    "converged"
                } else {
                    "step budget exhausted"
                },
                crn.output_name(),
                crn.output_count(&t.terminal)
            ));
        }
        if traces.len() > SHOWN_RUNS {
            text.push_str(&format!("... {} more runs\n", traces.len() - SHOWN_RUNS));
        }
        if let Some(st) = &stats {
            text.push_str(&format!(
                "{}/{} runs converged to {} (mean {:.1} steps, max {})\n",
                st.correct, st.runs, st.target, st.mean_steps, st.max_steps
            ));
        }
        emit(out, &text)?;
    }
    let converged = traces.iter().all(|t| t.converged);
    Ok(match &stats {
        Some(st) if st.correct == st.runs => EXIT_OK,
        Some(st) if st.failures.len() > st.runs - st.converged => EXIT_REFUTED,
        Some(_) => EXIT_CAPPED,
        None if converged => EXIT_OK,
        None => EXIT_CAPPED,
    })
}

fn cmd_check_oblivious(a: CrnArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let crn = read_crn(&a.crn)?;
    let oblivious = crn.is_output_oblivious();
    let monotonic = crn.is_output_monotonic();
    if a.json {
        emit_json(
            out,
            &json!({ "output_oblivious": oblivious, "output_monotonic": monotonic }),
        )?;
    } else {
        let offending: Vec<String> = crn
            .reactions()
            .iter()
            .filter(|r| r.reactant_count(crn.output()) > 0)
            .map(|r| crn.format_reaction(r))
            .collect();
        let mut text = format!(
            "output-oblivious: {}\noutput-monotonic: {}\n",
            if oblivious { "yes" } else { "no" },
            if monotonic { "yes" } else { "no" }
        );
        for r in offending {
            text.push_str(&format!("  consumes {}: {r}\n", crn.output_name()));
        }
        emit(out, &text)?;
    }
    Ok(if oblivious { EXIT_OK } else { EXIT_REFUTED })
}

fn cmd_dickson(a: DicksonArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (label, d, f): (String, usize, BoxedFn) = match (&a.spec, &a.builtin) {
        (Some(p), None) => {
            let s = parse_spec_file(p, None)?;
            let d = s.dimension();
            (
                p.display().to_string(),
                d,
                Box::new(move |x| s.eval(x).expect("validated spec evaluates")),
            )
        }
        (None, Some(n)) => {
            let b = builtin(n)?;
            (
                n.clone(),
                b.dimension.unwrap_or(a.dimension),
                Box::new(move |x| b.call(x)),
            )
        }
        _ => return Err(CliError::Usage("give exactly one of --spec or --builtin".into())),
    };
    let w = dickson_search(&*f, d, a.bound);
    if a.json {
        emit_json(out, &json!({ "function": label, "bound": a.bound, "witness": w }))?;
    } else {
        let text = match &w {
            Some(w) => format!(
                "witness for {label}: a={:?} b={:?} delta={:?}: f(a+delta)-f(a) = {} > {} = f(b+delta)-f(b)\n\
                 chain a_i = {:?} + i*{:?}, delta_j = {:?} + j*{:?}, all pairs i < j <= {}\n",
                w.a, w.b, w.delta, w.lhs, w.rhs,
                w.family.base, w.family.step, w.family.delta_base, w.family.delta_step, w.family.chain_length
            ),
            None => format!("no witness for {label} at bound {}\n", a.bound),
        };
        emit(out, &text)?;
    }
    Ok(if w.is_some() { EXIT_REFUTED } else { EXIT_OK })
}

fn cmd_scaling_limit(a: FunctionArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = spec_arg(&a)?;
    let grads = spec.scaling_limit();
    if a.json {
        let v: Vec<Vec<String>> = grads
            .iter()
            .map(|g| g.iter().map(|r| r.to_string()).collect())
            .collect();
        emit_json(out, &json!({ "gradients": v }))?;
    } else {
        let mut text = String::from("min over gradients:\n");
        for g in &grads {
            let parts: Vec<String> = g.iter().map(|r| r.to_string()).collect();
            text.push_str(&format!("  ({})\n", parts.join(", ")));
        }
        emit(out, &text)?;
    }
    Ok(EXIT_OK)
}
