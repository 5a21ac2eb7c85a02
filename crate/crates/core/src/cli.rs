//! Command-line front end: loads JSON problem descriptions, runs one
//! operation or a named suite, writes CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 1 validation error, 2 property violation.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::closed_form::{sample_function, ClosedFormConvexFunction};
use crate::conjugation::{conjugate_bruteforce, conjugate_fast, j_transform};
use crate::enlargements::{
    additivity_audit, enlargement_from_h, in_eps_subdifferential, inclusion_audit, rng_for, sample_eps_subdifferential, sample_t_eps, t_eps,
    transport_checked, weak_additivity_audit, EnlargementSample, EnlargementSet,
};
use crate::error::Error;
use crate::fixedpoint::{heuristic_fixed_point, residual_with_tol, trace_to_jsonl, DEFAULT_HA_TOL};
use crate::function::Bifunction;
use crate::graph::OperatorGraph;
use crate::grid::{Axis, Grid};
use crate::io::{bifunction_csv, grid_function_csv, to_json_pretty, write_text};
use crate::representations::{fitzpatrick, membership_report, sigma, DEFAULT_EQ_TOL};
use crate::suites;

pub const OUT_ENV: &str = "CONVREP_OUT";

#[derive(Debug, Parser)]
#[command(name = "convrep", version, about = "Convex representations of monotone operators on grids")]
pub struct Cli {
    /// Directory for CSV and JSON artifacts.
    #[arg(long, global = true, env = OUT_ENV, default_value = "convrep-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

/// JSON inputs. Each flag takes inline JSON or a path to a JSON file.
#[derive(Debug, Args, Default)]
struct Inputs {
    /// Primal grid: {"axes":[{"lo":..,"hi":..,"n":..}]} or a single axis.
    #[arg(long)]
    grid: Option<String>,
    /// Dual grid; defaults to --grid.
    #[arg(long)]
    dual_grid: Option<String>,
    /// Closed-form convex function, e.g. {"kind":"quadratic","a":1,"b":0,"c":0}.
    #[arg(long)]
    f: Option<String>,
    /// Operator graph: {"points":[[x, xstar], ...]}.
    #[arg(long = "T")]
    t: Option<String>,
    /// Sampled bifunction as written by this tool.
    #[arg(long)]
    h: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    /// Linear-time path for 1-D convex samples, brute force otherwise.
    Auto,
    Fast,
    Brute,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Property {
    Additivity,
    WeakAdditivity,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discrete conjugate of --f sampled on --grid, evaluated on --dual-grid.
    Conjugate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// J-transform of --h.
    Jtransform {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Fitzpatrick function of --T (or of the subdifferential of --f).
    Fitzpatrick {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Largest representative of --T (or of the subdifferential of --f).
    Sigma {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Membership report of --h against --T; exit 2 when it fails.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Equality tolerance on the graph.
        #[arg(long, default_value_t = DEFAULT_EQ_TOL)]
        tol: f64,
    },
    /// Residual |h - Jh| of --h; exit 2 when h < Jh somewhere.
    Residual {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = DEFAULT_HA_TOL)]
        tol: f64,
        /// Run the averaging heuristic for this many steps (needs --T).
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Enlargement at --x: eps-subdifferential and T^eps for --f, T^eps for
    /// --T, or the enlargement induced by --h.
    Enlarge {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x: Vec<f64>,
        #[arg(long)]
        eps: f64,
    },
    /// Transportation formula for two eps-subgradients of --f.
    Transport {
        #[command(flatten)]
        inputs: Inputs,
        /// "x,xstar,eps" or {"x":[..],"xstar":[..],"eps":..}.
        #[arg(long, allow_hyphen_values = true)]
        p1: String,
        #[arg(long, allow_hyphen_values = true)]
        p2: String,
        /// Weight of p1; p2 gets 1 - p.
        #[arg(long)]
        p: f64,
    },
    /// Pairwise audit over seeded samples of the eps-subdifferential of --f
    /// (x box from --grid, x* box from --dual-grid) or of T^eps for --T
    /// (samples on --grid nodes).
    Audit {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum)]
        property: Property,
        /// Upper end of the eps range.
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_min: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Margins below -tol count as violations.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Run a named experiment suite.
    Suite {
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
pub enum Failure {
    /// Bad input; names the flag (and the JSON path inside it when known).
    Invalid { field: String, message: String },
    /// The computation ran but a checked property does not hold.
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid { .. } => 1,
            Failure::Violation(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid { field, message } => write!(f, "error: {field}: {message}"),
            Failure::Violation(m) => write!(f, "violation: {m}"),
        }
    }
}

fn invalid(field: &str, e: impl std::fmt::Display) -> Failure {
    Failure::Invalid { field: field.into(), message: e.to_string().replace('\n', " ") }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Inline JSON when the argument starts with `{` or `[`, a file path otherwise.
fn json_text(field: &str, raw: &str) -> CliResult<String> {
    let trimmed = raw.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(raw.to_string())
    } else {
        std::fs::read_to_string(raw).map_err(|e| invalid(field, format!("cannot read {raw}: {e}")))
    }
}

fn parse_json<T: DeserializeOwned>(field: &str, text: &str) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            invalid(field, e.into_inner())
        } else {
            invalid(&format!("{field} at {path}"), e.into_inner())
        }
    })
}

fn load<T: DeserializeOwned>(field: &str, raw: &Option<String>) -> CliResult<T> {
    let raw = raw.as_ref().ok_or_else(|| invalid(field, "required for this subcommand"))?;
    parse_json(field, &json_text(field, raw)?)
}

fn load_grid(field: &str, raw: &Option<String>) -> CliResult<Grid> {
    let raw_s = raw.as_ref().ok_or_else(|| invalid(field, "required for this subcommand"))?;
    let text = json_text(field, raw_s)?;
    let value: serde_json::Value = parse_json(field, &text)?;
    if value.get("axes").is_some() {
        parse_json(field, &text)
    } else {
        let axis: Axis = parse_json(field, &text)?;
        Grid::new(vec![axis]).map_err(|e| invalid(field, e))
    }
}

impl Inputs {
    fn grids(&self) -> CliResult<(Grid, Grid)> {
        let g = load_grid("--grid", &self.grid)?;
        let s = match &self.dual_grid {
            Some(_) => load_grid("--dual-grid", &self.dual_grid)?,
            None => g.clone(),
        };
        if g.dim() != s.dim() {
            return Err(invalid("--dual-grid", format!("dimension {} does not match --grid dimension {}", s.dim(), g.dim())));
        }
        Ok((g, s))
    }

    fn function(&self) -> CliResult<ClosedFormConvexFunction> {
        let f: ClosedFormConvexFunction = load("--f", &self.f)?;
        f.validate().map_err(|e| invalid("--f", e))?;
        Ok(f)
    }

    /// --T, or the sampled subdifferential of --f on the given grids.
    fn operator(&self, x: &Grid, s: &Grid) -> CliResult<OperatorGraph> {
        match (&self.t, &self.f) {
            (Some(_), _) => load("--T", &self.t),
            (None, Some(_)) => self.function()?.subdifferential_graph(x, s).map_err(|e| invalid("--f", e)),
            (None, None) => Err(invalid("--T", "required for this subcommand (or give --f)")),
        }
    }
}

struct Run<'a> {
    out: &'a Path,
    written: Vec<PathBuf>,
}

impl Run<'_> {
    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = write_text(self.out, name, text).map_err(|e| invalid("--out", e))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text = to_json_pretty(value).map_err(|e| invalid(name, e))?;
        self.write(name, &text)
    }

    fn bifunction(&mut self, stem: &str, h: &Bifunction) -> CliResult<()> {
        self.write(&format!("{stem}.csv"), &bifunction_csv(h))?;
        self.json(&format!("{stem}.json"), h)
    }
}

fn enlargement_csv(set: &EnlargementSet) -> String {
    let d = set.x.len();
    let mut out = String::from(if d == 1 { "xstar\n" } else { "xstar1,xstar2\n" });
    for m in &set.members {
        let row: Vec<String> = m.iter().map(|v| crate::ext::format_sample(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn samples_csv(samples: &[EnlargementSample]) -> String {
    let mut out = String::from("x,xstar,eps\n");
    for s in samples {
        let cols: Vec<String> = s.x.iter().chain(&s.xstar).chain([&s.eps]).map(|v| crate::ext::format_sample(*v)).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

fn parse_sample(field: &str, raw: &str) -> CliResult<EnlargementSample> {
    if raw.trim_start().starts_with('{') {
        return parse_json(field, raw);
    }
    let parts: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| invalid(field, format!("expected x,xstar,eps; cannot parse {p:?}"))))
        .collect::<CliResult<_>>()?;
    match parts[..] {
        [x, xs, eps] => Ok(EnlargementSample { x: vec![x], xstar: vec![xs], eps }),
        _ => Err(invalid(field, format!("expected 3 comma-separated numbers, got {}", parts.len()))),
    }
}

fn lib_err(field: &str) -> impl Fn(Error) -> Failure + '_ {
    move |e| invalid(field, e)
}

fn execute(command: &Command, run: &mut Run) -> CliResult<Option<String>> {
    match command {
        Command::Conjugate { inputs, method } => {
            let (g, s) = inputs.grids()?;
            let f = sample_function(&inputs.function()?, &g).map_err(lib_err("--f"))?;
            let result = match method {
                Method::Brute => conjugate_bruteforce(&f, &s).map_err(lib_err("--f"))?,
                Method::Fast => conjugate_fast(&f, &s).map_err(lib_err("--f"))?,
                Method::Auto => match conjugate_fast(&f, &s) {
                    Ok(r) => r,
                    Err(_) => conjugate_bruteforce(&f, &s).map_err(lib_err("--f"))?,
                },
            };
            run.write("conjugate.csv", &grid_function_csv(&result.function, "xstar"))?;
            run.json("conjugate.json", &result)?;
            Ok(None)
        }
        Command::Jtransform { inputs } => {
            let h: Bifunction = load("--h", &inputs.h)?;
            let result = j_transform(&h).map_err(lib_err("--h"))?;
            run.write("jh.csv", &bifunction_csv(&result.function))?;
            run.json("jh.json", &result)?;
            Ok(None)
        }
        Command::Fitzpatrick { inputs } => {
            let (g, s) = inputs.grids()?;
            let t = inputs.operator(&g, &s)?;
            let phi = fitzpatrick(&t, &g, &s).map_err(lib_err("--T"))?;
            run.bifunction("phi", &phi)?;
            Ok(None)
        }
        Command::Sigma { inputs } => {
            let (g, s) = inputs.grids()?;
            let t = inputs.operator(&g, &s)?;
            let sig = sigma(&t, &g, &s).map_err(lib_err("--T"))?;
            run.bifunction("sigma", &sig)?;
            Ok(None)
        }
        Command::Verify { inputs, tol } => {
            let h: Bifunction = load("--h", &inputs.h)?;
            let t = inputs.operator(h.xgrid(), h.sgrid())?;
            let report = membership_report(&h, &t, *tol).map_err(lib_err("--T"))?;
            run.json("membership.json", &report)?;
            if report.verdict {
                return Ok(None);
            }
            let mut failed = Vec::new();
            if !report.is_convex_on_grid {
                failed.push(format!("convexity fails near {:?}", report.convexity.witness));
            }
            if !report.minorizes_pi {
                failed.push(format!("h < pi at {:?}", report.minorization.witness));
            }
            if !report.equals_pi_on_t {
                failed.push(format!("h != pi on the graph at {:?}", report.equality_on_t.witness));
            }
            if !report.equality_set_matches_t {
                failed.push(format!(
                    "equality set has {} extra and {} missing nodes",
                    report.equality_set.extra, report.equality_set.missing
                ));
            }
            Ok(Some(failed.join("; ")))
        }
        Command::Residual { inputs, tol, iters } => {
            let h: Bifunction = load("--h", &inputs.h)?;
            let report = residual_with_tol(&h, *tol).map_err(lib_err("--h"))?;
            run.json("residual.json", &report)?;
            if let Some(n) = iters {
                let t = inputs.operator(h.xgrid(), h.sgrid())?;
                let (g, trace) = heuristic_fixed_point(&h, &t, *n, *tol).map_err(|e| match e {
                    Error::MembershipLost { .. } => Failure::Violation(e.to_string()),
                    e => invalid("--h", e),
                })?;
                run.write("trace.jsonl", &trace_to_jsonl(&trace).map_err(lib_err("trace"))?)?;
                run.bifunction("fixed_point", &g)?;
            }
            Ok((!report.is_in_ha).then(|| format!("h < Jh - {tol:e} somewhere (sup |h - Jh| = {})", report.sup_abs_diff)))
        }
        Command::Enlarge { inputs, x, eps } => {
            if inputs.h.is_some() {
                let h: Bifunction = load("--h", &inputs.h)?;
                let set = enlargement_from_h(&h, x, *eps).map_err(lib_err("--x"))?;
                run.write("enlargement.csv", &enlargement_csv(&set))?;
                run.json("enlargement.json", &set)?;
                return Ok(None);
            }
            let (_, s) = inputs.grids()?;
            if inputs.t.is_some() {
                let t: OperatorGraph = load("--T", &inputs.t)?;
                let set = t_eps(&t, x, *eps, &s).map_err(lib_err("--x"))?;
                run.write("enlargement.csv", &enlargement_csv(&set))?;
                run.json("enlargement.json", &set)?;
                return Ok(None);
            }
            let f = inputs.function()?;
            let audit = inclusion_audit(&f, x, *eps, &s).map_err(lib_err("--x"))?;
            run.write("eps_subdifferential.csv", &enlargement_csv(&audit.eps_subdifferential))?;
            run.write("t_eps.csv", &enlargement_csv(&audit.t_eps))?;
            run.json("enlargement.json", &audit)?;
            Ok((!audit.subset).then(|| format!("{} eps-subgradients lie outside T^eps", audit.missing.len())))
        }
        Command::Transport { inputs, p1, p2, p } => {
            let f = inputs.function()?;
            let a = parse_sample("--p1", p1)?;
            let b = parse_sample("--p2", p2)?;
            for (field, s) in [("--p1", &a), ("--p2", &b)] {
                if !in_eps_subdifferential(&f, &s.x, &s.xstar, s.eps, 0.0).map_err(lib_err(field))? {
                    return Err(invalid(field, format!("({:?}, {:?}) is not a {}-subgradient of --f", s.x, s.xstar, s.eps)));
                }
            }
            let check = transport_checked(&f, &a, &b, *p, 1.0 - p).map_err(lib_err("--p"))?;
            run.json("transport.json", &check)?;
            Ok((!check.passed()).then(|| {
                let r = &check.result;
                format!("transported point ({:?}, {:?}) with epsbar {} is not in the enlargement", r.xbar, r.xsbar, r.epsbar)
            }))
        }
        Command::Audit { inputs, property, eps, eps_min, samples, seed, tol } => {
            if *eps_min > *eps {
                return Err(invalid("--eps-min", format!("{eps_min} exceeds --eps {eps}")));
            }
            let (g, s) = inputs.grids()?;
            let mut rng = rng_for(*seed, 0);
            let pts = if inputs.t.is_some() {
                let t: OperatorGraph = load("--T", &inputs.t)?;
                sample_t_eps(&t, &g, (*eps_min, *eps), *samples, &mut rng).map_err(lib_err("--T"))?
            } else {
                let f = inputs.function()?;
                if g.dim() != 1 {
                    return Err(invalid("--grid", "sampling the eps-subdifferential needs a 1-D grid"));
                }
                let (gx, sx) = (&g.axes()[0], &s.axes()[0]);
                sample_eps_subdifferential(&f, (gx.lo(), gx.hi()), (sx.lo(), sx.hi()), (*eps_min, *eps), *samples, &mut rng)
                    .map_err(lib_err("--f"))?
            };
            let result = match property {
                Property::Additivity => additivity_audit(&pts),
                Property::WeakAdditivity => weak_additivity_audit(&pts),
            };
            run.write("samples.csv", &samples_csv(&pts))?;
            run.json("audit.json", &result)?;
            Ok((result.worst_margin < -tol).then(|| format!("{} margin {:e} below -{tol:e}", result.property, result.worst_margin)))
        }
        Command::Suite { name, list, seed } => {
            if *list {
                for s in suites::registry() {
                    println!("{:<24}{}", s.name, s.description);
                }
                return Ok(None);
            }
            let name = name.as_ref().ok_or_else(|| invalid("suite", "give a suite name or --list"))?;
            let outcome = suites::run(name, *seed).map_err(|e| match e {
                Error::UnknownSuite { .. } => invalid("suite", e),
                e => Failure::Violation(format!("{name}: {e}")),
            })?;
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            let dir = run.out.join(name);
            let mut sub = Run { out: &dir, written: Vec::new() };
            sub.json("outcome.json", &outcome)?;
            for (file, text) in &outcome.artifacts {
                sub.write(file, text)?;
            }
            run.written.extend(sub.written);
            let failed: Vec<&str> = outcome.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            Ok((!failed.is_empty()).then(|| format!("{name}: failed checks: {}", failed.join(", "))))
        }
    }
}

/// Parses `args` (program name first), runs, prints diagnostics and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut run = Run { out: &cli.out, written: Vec::new() };
    let result = execute(&cli.command, &mut run);
    for p in &run.written {
        println!("wrote {}", p.display());
    }
    match result {
        Ok(None) => 0,
        Ok(Some(v)) => {
            let f = Failure::Violation(v);
            eprintln!("{f}");
            f.exit_code()
        }
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
