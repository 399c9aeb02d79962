//! Argument parsing and dispatch for the `stieltjes` binary.
//!
//! [`run`] never exits the process; it returns the exit status together with
//! what would be written to stdout and stderr.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use stieltjes::dist::{Distribution, CATALOG};
use stieltjes::fingerprint::{collision_experiment, compare, compute_fingerprint, Fingerprint};
use stieltjes::inversion::{feller_cdf, feller_cdf_alt, post_widder_density, InversionValue, TransformOracle};
use stieltjes::muntz::{divergence_certificate, golitschek_family, sup_norm_estimate, MuntzSequence};
use stieltjes::transforms::{verify_identity, Route, TransformRequest, DEFAULT_TOL};
use stieltjes::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stieltjes", version, about = "Laplace-Stieltjes transforms, inversion, Muntz approximation and fingerprints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the transform at one or more points.
    Transform(TransformArgs),
    /// Recover a density (Post-Widder) or CDF (Feller) from a univariate transform.
    Invert(InvertArgs),
    /// Tabulate n, the contraction bound and the sampled sup norm of Q_n.
    Muntz(MuntzArgs),
    /// Transform values on a product Muntz grid.
    Fingerprint(FingerprintArgs),
    /// Compare two laws by their fingerprints, or run the seeded collision experiment.
    Compare(CompareArgs),
    /// Check the CDF and survival forms of the transform identity.
    VerifyIdentity(VerifyArgs),
    /// List the distribution kinds and their parameters.
    Catalog(CatalogArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    PostWidder,
    Feller,
    FellerAlt,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Distribution spec: a path or inline JSON.
    #[arg(long)]
    spec: String,
    /// Evaluation point, comma-separated (one value per dimension); repeat for several points.
    #[arg(long = "s", required = true, allow_hyphen_values = true)]
    s: Vec<String>,
    #[arg(long, default_value = "auto", value_parser = parse_route)]
    route: Route,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    #[arg(long)]
    spec: String,
    /// Points, comma-separated.
    #[arg(long = "x", allow_hyphen_values = true)]
    x: String,
    /// Inversion order.
    #[arg(long = "n", default_value_t = 64)]
    n: usize,
    #[arg(long, value_enum, default_value = "post-widder")]
    method: Method,
    #[arg(long, env = "STIELTJES_PRECISION_BITS", default_value_t = 128)]
    precision_bits: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct MuntzArgs {
    /// Exponent of the target x^q.
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// primes, integers or file:PATH
    #[arg(long, default_value = "primes")]
    grid: String,
    /// Largest n.
    #[arg(long, default_value_t = 20)]
    len: usize,
    /// Minimum number of sample points (at least 10 n are used).
    #[arg(long, default_value_t = 200)]
    grid_size: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    #[arg(long)]
    spec: String,
    /// primes, integers or file:PATH (used on every axis)
    #[arg(long, default_value = "primes")]
    grid: String,
    /// Prefix length per axis.
    #[arg(long, default_value_t = 8)]
    len: usize,
    #[arg(long, default_value = "auto", value_parser = parse_route)]
    route: Route,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Two distribution specs; omit to run the collision experiment instead.
    #[arg(long, num_args = 1)]
    spec: Vec<String>,
    #[arg(long, default_value = "primes")]
    grid: String,
    #[arg(long, default_value_t = 8)]
    len: usize,
    #[arg(long, default_value = "auto", value_parser = parse_route)]
    route: Route,
    /// Comparison tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for the collision experiment.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of pairs in the collision experiment.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    spec: String,
    #[arg(long = "s", required = true, allow_hyphen_values = true)]
    s: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Run = Result<Output, Failure>;

struct Output {
    text: String,
    /// A result that was produced but failed its own check.
    failed_check: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, failed_check: false }
    }
}

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
    let result = match cli.command {
        Command::Transform(a) => transform(a),
        Command::Invert(a) => invert(a),
        Command::Muntz(a) => muntz(a),
        Command::Fingerprint(a) => fingerprint(a),
        Command::Compare(a) => compare_cmd(a),
        Command::VerifyIdentity(a) => verify(a),
        Command::Catalog(a) => catalog(a),
    };
    match result {
        Ok(out) => Outcome {
            code: if out.failed_check { EXIT_NUMERICAL } else { EXIT_OK },
            stdout: out.text,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(Failure::Numerical(e)) => {
            let doc = json!({ "status": "numerical-failure", "error": diagnostic(&e), "message": e.to_string() });
            Outcome { code: EXIT_NUMERICAL, stdout: pretty(&doc), stderr: format!("error: {e}\n") }
        }
    }
}

fn diagnostic(e: &Error) -> serde_json::Value {
    match *e {
        Error::QuadratureNonConvergence { estimate, error, tol } => {
            json!({ "kind": "quadrature-non-convergence", "estimate": estimate, "error": error, "tol": tol })
        }
        Error::PrecisionExhausted { error, magnitude } => {
            json!({ "kind": "precision-exhausted", "error": error, "magnitude": magnitude })
        }
        Error::SeriesDiverged { term, magnitude } => json!({ "kind": "series-diverged", "term": term, "magnitude": magnitude }),
        Error::DerivativeUnavailable { order, max } => json!({ "kind": "derivative-unavailable", "order": order, "max": max }),
        _ => json!({ "kind": "other" }),
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

/// 17 significant digits, enough to round-trip any `f64`.
fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn read_spec(arg: &str) -> Result<Distribution, Failure> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("--spec: cannot read `{arg}`: {e}")))?
    };
    Ok(Distribution::from_json(&text)?)
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("{flag}: `{t}` is not a number")))
        })
        .collect()
}

fn parse_grid(arg: &str, len: usize) -> Result<MuntzSequence, Failure> {
    let seq = match arg {
        "primes" => MuntzSequence::primes(len),
        "integers" => MuntzSequence::integers(len),
        other => {
            let Some(path) = other.strip_prefix("file:") else {
                return Err(Failure::Usage(format!("--grid: expected primes, integers or file:PATH (got `{other}`)")));
            };
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| Failure::Usage(format!("--grid: cannot read `{path}`: {e}")))?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| Failure::Usage(format!("--grid: `{t}` is not a number"))))
                .collect::<Result<Vec<_>, _>>()?;
            MuntzSequence::custom(values).map_err(|e| Failure::Usage(format!("--grid: {e}")))?
        }
    };
    Ok(seq.prefix(len).map_err(|e| Failure::Usage(format!("--len: {e}")))?)
}

fn transform(a: TransformArgs) -> Run {
    let dist = read_spec(&a.spec)?;
    let points = a.s.iter().map(|s| parse_list("--s", s)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(points.len());
    for s in points {
        let v = TransformRequest::new(&dist, s.clone()).route(a.route).tol(a.tol).evaluate()?;
        rows.push(json!({ "s": s, "value": v.value, "est_error": v.est_error, "route": v.route, "evaluations": v.evaluations }));
    }
    let text = match a.format {
        Format::Json if rows.len() == 1 => pretty(&rows[0]),
        Format::Json => pretty(&rows),
        Format::Csv => {
            let mut out = String::new();
            let dim = dist.dim();
            let cols: Vec<String> = (1..=dim).map(|i| format!("s{i}")).collect();
            writeln!(out, "{},value,est_error,route", cols.join(",")).unwrap();
            for r in &rows {
                let s: Vec<String> = r["s"].as_array().unwrap().iter().map(|v| csv_num(v.as_f64().unwrap())).collect();
                writeln!(
                    out,
                    "{},{},{},{}",
                    s.join(","),
                    csv_num(r["value"].as_f64().unwrap()),
                    csv_num(r["est_error"].as_f64().unwrap()),
                    r["route"].as_str().unwrap()
                )
                .unwrap();
            }
            out
        }
    };
    Ok(Output::ok(text))
}

fn invert(a: InvertArgs) -> Run {
    let dist = read_spec(&a.spec)?;
    let Some(d) = dist.as_univariate() else {
        return Err(Failure::Usage("--spec: inversion needs a univariate distribution".into()));
    };
    let xs = parse_list("--x", &a.x)?;
    let oracle = TransformOracle::from_distribution(d).with_precision(a.precision_bits);
    let method = match a.method {
        Method::PostWidder => "post-widder",
        Method::Feller => "feller",
        Method::FellerAlt => "feller-alt",
    };
    let mut rows: Vec<(f64, InversionValue)> = Vec::new();
    for x in xs {
        let v = match a.method {
            Method::PostWidder => post_widder_density(&oracle, x, a.n),
            Method::Feller => feller_cdf(&oracle, x, a.n),
            Method::FellerAlt => feller_cdf_alt(&oracle, x, a.n),
        }?;
        rows.push((x, v));
    }
    let text = match a.format {
        Format::Json => {
            let docs: Vec<_> = rows
                .iter()
                .map(|(x, v)| {
                    json!({ "x": x, "n": v.n, "method": method, "value": v.value, "raw": v.raw,
                            "certified_error": v.certified_error, "terms": v.terms })
                })
                .collect();
            if docs.len() == 1 { pretty(&docs[0]) } else { pretty(&docs) }
        }
        Format::Csv => {
            let mut out = String::from("x,n,method,value,raw,certified_error\n");
            for (x, v) in &rows {
                writeln!(out, "{},{},{method},{},{},{}", csv_num(*x), v.n, csv_num(v.value), csv_num(v.raw), csv_num(v.certified_error))
                    .unwrap();
            }
            out
        }
    };
    Ok(Output::ok(text))
}

fn muntz(a: MuntzArgs) -> Run {
    let seq = parse_grid(&a.grid, a.len)?;
    let family = golitschek_family(a.q, seq.values(), a.len)?;
    let mut rows = Vec::with_capacity(family.len());
    for approx in &family {
        let sup = sup_norm_estimate(approx, a.grid_size.max(100))?;
        rows.push((approx.n(), approx.bound(), sup.sup, sup.argmax));
    }
    let text = match a.format {
        Format::Csv => {
            let mut out = String::from("n,bound,sampled_sup\n");
            for (n, bound, sup, _) in &rows {
                writeln!(out, "{n},{},{}", csv_num(*bound), csv_num(*sup)).unwrap();
            }
            out
        }
        Format::Json => {
            let cert = divergence_certificate(&seq, seq.len())?;
            let rows: Vec<_> =
                rows.iter().map(|(n, b, s, x)| json!({ "n": n, "bound": b, "sampled_sup": s, "argmax": x })).collect();
            pretty(&json!({ "q": a.q, "lambdas": seq.values(), "certificate": cert, "rows": rows }))
        }
    };
    Ok(Output::ok(text))
}

fn fingerprint_of(dist: &Distribution, grid: &MuntzSequence, len: usize, route: Route, tol: f64) -> Result<Fingerprint, Failure> {
    let grids = vec![grid.clone(); dist.dim()];
    let lens = vec![len; dist.dim()];
    Ok(compute_fingerprint(dist, &grids, &lens, route, tol)?)
}

fn fingerprint(a: FingerprintArgs) -> Run {
    let dist = read_spec(&a.spec)?;
    let grid = parse_grid(&a.grid, a.len)?;
    let fp = fingerprint_of(&dist, &grid, a.len, a.route, a.tol)?;
    let text = match a.format {
        Format::Json => pretty(&fp),
        Format::Csv => {
            let mut out = String::new();
            let idx: Vec<String> = (1..=fp.dim).map(|i| format!("i{i}")).collect();
            let s: Vec<String> = (1..=fp.dim).map(|i| format!("s{i}")).collect();
            writeln!(out, "{},{},value,est_error", idx.join(","), s.join(",")).unwrap();
            for (k, (v, e)) in fp.values.iter().zip(&fp.est_errors).enumerate() {
                let mi = fp.multi_index(k);
                let pts: Vec<String> = mi.iter().enumerate().map(|(ax, &i)| csv_num(fp.grids[ax].values[i])).collect();
                let mi: Vec<String> = mi.iter().map(|i| i.to_string()).collect();
                writeln!(out, "{},{},{},{}", mi.join(","), pts.join(","), csv_num(*v), csv_num(*e)).unwrap();
            }
            out
        }
    };
    Ok(Output::ok(text))
}

fn compare_cmd(a: CompareArgs) -> Run {
    let grid = parse_grid(&a.grid, a.len)?;
    match a.spec.len() {
        0 => {
            let r = collision_experiment(a.seed, a.trials, &grid, a.tol)?;
            let failed = r.false_merges + r.false_splits > 0 || !r.failures.is_empty();
            let text = match a.format {
                Format::Json => pretty(&r),
                Format::Csv => {
                    let m = |v: Option<f64>| v.map(csv_num).unwrap_or_default();
                    format!(
                        "seed,trials,equal_pairs,unequal_pairs,false_merges,false_splits,min_margin,min_separation\n{},{},{},{},{},{},{},{}\n",
                        r.seed, r.trials, r.equal_pairs, r.unequal_pairs, r.false_merges, r.false_splits,
                        m(r.min_margin), m(r.min_separation)
                    )
                }
            };
            Ok(Output { text, failed_check: failed })
        }
        2 => {
            let d1 = read_spec(&a.spec[0])?;
            let d2 = read_spec(&a.spec[1])?;
            if d1.dim() != d2.dim() {
                return Err(Failure::Usage(format!("--spec: dimensions differ ({} vs {})", d1.dim(), d2.dim())));
            }
            // evaluate well below the comparison tolerance
            let eval_tol = (a.tol * 0.1).clamp(1e-14, 1e-2);
            let f1 = fingerprint_of(&d1, &grid, a.len, a.route, eval_tol)?;
            let f2 = fingerprint_of(&d2, &grid, a.len, a.route, eval_tol)?;
            let c = compare(&f1, &f2, a.tol)?;
            let text = match a.format {
                Format::Json => pretty(&c),
                Format::Csv => format!(
                    "verdict,max_delta,threshold,margin\n{},{},{},{}\n",
                    serde_json::to_value(c.verdict).unwrap().as_str().unwrap(),
                    csv_num(c.max_delta),
                    csv_num(c.threshold),
                    csv_num(c.margin)
                ),
            };
            Ok(Output::ok(text))
        }
        n => Err(Failure::Usage(format!("--spec: compare takes two specs (got {n})"))),
    }
}

fn verify(a: VerifyArgs) -> Run {
    let dist = read_spec(&a.spec)?;
    let points = a.s.iter().map(|s| parse_list("--s", s)).collect::<Result<Vec<_>, _>>()?;
    let mut reports = Vec::with_capacity(points.len());
    for s in &points {
        reports.push(verify_identity(&dist, s, a.tol)?);
    }
    let failed = reports.iter().any(|r| !r.pass);
    let text = match a.format {
        Format::Json if reports.len() == 1 => pretty(&reports[0]),
        Format::Json => pretty(&reports),
        Format::Csv => {
            let mut out = String::new();
            let cols: Vec<String> = (1..=dist.dim()).map(|i| format!("s{i}")).collect();
            writeln!(out, "{},reference,carson,carson_gap,pass", cols.join(",")).unwrap();
            for r in &reports {
                let s: Vec<String> = r.s.iter().map(|v| csv_num(*v)).collect();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.join(","),
                    csv_num(r.reference.value),
                    csv_num(r.carson.value),
                    csv_num(r.carson_gap),
                    r.pass
                )
                .unwrap();
            }
            out
        }
    };
    Ok(Output { text, failed_check: failed })
}

fn catalog(a: CatalogArgs) -> Run {
    let text = match a.format {
        Format::Json => pretty(&CATALOG),
        Format::Csv => {
            let mut out = String::from("name,dim,params,constraints,needs_components\n");
            for e in CATALOG {
                writeln!(out, "{},{},{},\"{}\",{}", e.name, e.dim, e.params.join(" "), e.constraints, e.needs_components).unwrap();
            }
            out
        }
    };
    Ok(Output::ok(text))
}
