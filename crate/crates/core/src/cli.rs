//! Command-line front end: `curve`, `evaluate`, `sweep` and `verify`.
//!
//! Every flag may also be given in a plain-text file passed with
//! `--config FILE`, one `key=value` per line (`#` starts a comment, keys are
//! flag names without the dashes). Flags on the command line win.
//!
//! Exit codes: 0 ok, 1 configuration error, 2 value iteration did not
//! converge, 3 an invariant failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arrivals::Family;
use crate::evaluation::{
    bernoulli_reward, build_mdp, series::maximin_kinks, simulate, EvaluationResult,
};
use crate::metrics::{sweep, PolicyChoice, Ratio, SweepConfig, ViSettings};
use crate::policy::{endpoints, Endpoint, Policy, StationaryPolicy};
use crate::reward::{RewardFunction, RewardKind};
use crate::verify::{self, VerifySettings};
use crate::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NONCONVERGENCE: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

const SUBCOMMANDS: [&str; 4] = ["curve", "evaluate", "sweep", "verify"];

#[derive(Debug, Parser)]
#[command(
    name = "maximin-power",
    version,
    about = "Power control policies for energy harvesting links"
)]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample ω, φ and the greedy policy on [0, x-max], plus the corners of ω
    #[command(args_override_self = true)]
    Curve(Flags),
    /// Average reward of one policy in one cell
    #[command(args_override_self = true)]
    Evaluate(Flags),
    /// Additive gaps and multiplicative factors over a grid of cells
    #[command(args_override_self = true)]
    Sweep(Flags),
    /// Run the invariant suites
    #[command(args_override_self = true)]
    Verify(Flags),
}

/// Flags shared by all subcommands; each one reads the subset it needs.
#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// awgn:GAMMA or sqrt
    #[arg(long)]
    reward: Option<String>,
    /// bernoulli, uniform or exponential
    #[arg(long)]
    family: Option<Family>,
    /// battery capacity
    #[arg(long)]
    c: Option<f64>,
    /// capacity grid: a,b,c or lin:START:STOP:COUNT or log:START:STOP:COUNT
    #[arg(long = "c-grid")]
    c_grid: Option<String>,
    /// mean-to-capacity ratio (grid syntax allowed)
    #[arg(long, conflicts_with = "nmcr")]
    p: Option<String>,
    /// nominal mean-to-capacity ratio (grid syntax allowed)
    #[arg(long)]
    nmcr: Option<String>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Monte Carlo horizon
    #[arg(long)]
    n: Option<usize>,
    /// Monte Carlo paths
    #[arg(long)]
    paths: Option<usize>,
    /// value-iteration grid size
    #[arg(long = "grid-N")]
    grid_n: Option<usize>,
    /// value-iteration span tolerance
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// series truncation tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// maximin, fixed_fraction, greedy (comma list for sweep; `optimal` with vi)
    #[arg(long)]
    policy: Option<String>,
    /// right end of the curve range
    #[arg(long = "x-max")]
    x_max: Option<f64>,
    /// number of curve samples
    #[arg(long)]
    samples: Option<usize>,
    /// only run verify checks whose module/name contains this
    #[arg(long)]
    filter: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Series,
    Mc,
    Vi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Library(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Library(Error::Io(e))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Library(Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
            Failure::Library(_) => EXIT_CONFIG,
            Failure::Invariant(_) => EXIT_INVARIANT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(s) => format!("configuration error: {s}"),
            Failure::Library(e) => format!("error: {e}"),
            Failure::Invariant(s) => format!("invariant failure: {s}"),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn config_err<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Config(msg.into()))
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let stdout = io::stdout();
    let stderr = io::stderr();
    ExitCode::from(run(
        std::env::args_os(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    ))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code. Data goes to `out` unless `--out` names a file.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_config_file(args) {
        Ok(a) => a,
        Err(f) => {
            let _ = writeln!(err, "{}", f.message());
            return f.code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Curve(f) => cmd_curve(f, out),
        Command::Evaluate(f) => cmd_evaluate(f, out),
        Command::Sweep(f) => cmd_sweep(f, out),
        Command::Verify(f) => cmd_verify(f, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{}", f.message());
            f.code()
        }
    }
}

/// Splices the `key=value` lines of `--config FILE` in as flags right
/// after the subcommand, so that later command-line flags override them.
fn with_config_file(args: Vec<OsString>) -> Outcome<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            match it.next() {
                Some(p) => path = Some(PathBuf::from(p)),
                None => return config_err("--config needs a file name"),
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .or_else(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let mut injected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return config_err(format!("{}:{}: expected key=value", path.display(), i + 1));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let key = if key.eq_ignore_ascii_case("grid-n") {
            "grid-N".to_owned()
        } else {
            key
        };
        injected.push(OsString::from(format!("--{key}={}", v.trim())));
    }
    let at = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, injected);
    Ok(rest)
}

fn parse_reward(spec: Option<&str>) -> Outcome<RewardFunction> {
    let spec = spec.unwrap_or("awgn:1");
    let lower = spec.trim().to_ascii_lowercase();
    if lower == "sqrt" {
        return Ok(RewardFunction::sqrt());
    }
    if lower == "awgn" {
        return Ok(RewardFunction::awgn(1.0)?);
    }
    if let Some(g) = lower.strip_prefix("awgn:") {
        let gamma: f64 = g
            .parse()
            .or_else(|_| config_err(format!("bad gamma in --reward {spec}")))?;
        return RewardFunction::awgn(gamma).or_else(|e| config_err(e.to_string()));
    }
    config_err(format!(
        "unknown reward `{spec}` (expected awgn:GAMMA or sqrt)"
    ))
}

/// `a,b,c`, `lin:START:STOP:COUNT` or `log:START:STOP:COUNT`.
fn parse_grid(what: &str, spec: &str) -> Outcome<Vec<f64>> {
    let bad = || Failure::Config(format!("bad {what} grid `{spec}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [kind @ ("lin" | "log"), a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            let t = |k: usize| {
                if n == 1 {
                    0.0
                } else {
                    k as f64 / (n - 1) as f64
                }
            };
            if *kind == "lin" {
                (0..n).map(|k| a + (b - a) * t(k)).collect()
            } else {
                if !(a > 0.0 && b > 0.0) {
                    return Err(bad());
                }
                (0..n)
                    .map(|k| (a.ln() + (b.ln() - a.ln()) * t(k)).exp())
                    .collect()
            }
        }
        [_] => spec.split(',').map(num).collect::<Outcome<Vec<f64>>>()?,
        _ => return Err(bad()),
    };
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return config_err(format!("{what} values must be positive: `{spec}`"));
    }
    Ok(values)
}

fn single(what: &str, values: Vec<f64>) -> Outcome<f64> {
    match values.as_slice() {
        [v] => Ok(*v),
        _ => config_err(format!("{what} must be a single value here")),
    }
}

fn positive(what: &str, v: f64) -> Outcome<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        config_err(format!("{what} must be positive, got {v}"))
    }
}

fn positive_count(what: &str, v: usize) -> Outcome<usize> {
    if v > 0 {
        Ok(v)
    } else {
        config_err(format!("{what} must be positive"))
    }
}

fn ratios(f: &Flags) -> Outcome<Vec<Ratio>> {
    match (&f.p, &f.nmcr) {
        (Some(p), None) => Ok(parse_grid("p", p)?.into_iter().map(Ratio::Mcr).collect()),
        (None, Some(n)) => Ok(parse_grid("nmcr", n)?
            .into_iter()
            .map(Ratio::Nmcr)
            .collect()),
        (Some(_), Some(_)) => config_err("give exactly one of --p and --nmcr"),
        (None, None) => config_err("one of --p and --nmcr is required"),
    }
}

fn capacities(f: &Flags) -> Outcome<Vec<f64>> {
    match (f.c, &f.c_grid) {
        (Some(c), None) => Ok(vec![positive("c", c)?]),
        (None, Some(g)) => parse_grid("c", g),
        (Some(_), Some(_)) => config_err("give only one of --c and --c-grid"),
        (None, None) => config_err("one of --c and --c-grid is required"),
    }
}

/// Writes `bytes` to `--out` when given, otherwise to `out`.
fn emit(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Outcome {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn csv_bytes<S: Serialize>(rows: &[S]) -> Outcome<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(Error::from)?;
    }
    w.into_inner()
        .map_err(|e| Failure::Library(Error::Io(e.into_error())))
}

fn json_bytes<S: Serialize + ?Sized>(value: &S) -> Outcome<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Debug, Serialize)]
struct CurveRow {
    x: f64,
    omega: f64,
    phi: f64,
    greedy: f64,
}

/// The path of the corner file that accompanies a curve written to `out`.
pub fn endpoints_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "curve".into(), |s| s.to_string_lossy().into_owned());
    let ext = out
        .extension()
        .map_or_else(|| "csv".into(), |e| e.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_endpoints.{ext}"))
}

fn cmd_curve(f: &Flags, out: &mut dyn Write) -> Outcome {
    let reward = parse_reward(f.reward.as_deref())?;
    let p = match (&f.p, &f.nmcr) {
        (Some(p), None) => single("--p", parse_grid("p", p)?)?,
        _ => return config_err("curve needs exactly one --p value"),
    };
    let x_max = positive("x-max", f.x_max.unwrap_or(8.0))?;
    let samples = f.samples.unwrap_or(801);
    if samples < 2 {
        return config_err("samples must be at least 2");
    }
    let omega = StationaryPolicy::maximin(&reward, p)?;
    let phi = StationaryPolicy::fixed_fraction(p)?;
    let rows: Vec<CurveRow> = (0..samples)
        .map(|k| {
            let x = x_max * k as f64 / (samples - 1) as f64;
            CurveRow {
                x,
                omega: omega.consumption(x),
                phi: phi.consumption(x),
                greedy: x,
            }
        })
        .collect();
    let corners: Vec<Endpoint> = match reward.kind() {
        RewardKind::Awgn { gamma } => {
            let mut e = endpoints(*gamma, p, 200)?;
            e.retain(|e| e.x <= x_max);
            e
        }
        _ => {
            let mut e = vec![Endpoint {
                k: 0,
                x: 0.0,
                y: 0.0,
            }];
            e.extend(
                maximin_kinks(&reward, p, x_max)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, x)| Endpoint {
                        k: i as u32 + 1,
                        x,
                        y: omega.consumption(x),
                    }),
            );
            e
        }
    };
    match f.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let curve = csv_bytes(&rows)?;
            let ends = csv_bytes(&corners)?;
            match &f.out {
                Some(path) => {
                    fs::write(path, curve)?;
                    fs::write(endpoints_path(path), ends)?;
                }
                None => {
                    out.write_all(&curve)?;
                    out.write_all(b"\n")?;
                    out.write_all(&ends)?;
                }
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                reward: String,
                p: f64,
                curve: &'a [CurveRow],
                endpoints: &'a [Endpoint],
            }
            let doc = Doc {
                reward: reward.label(),
                p,
                curve: &rows,
                endpoints: &corners,
            };
            emit(f.out.as_deref(), &json_bytes(&doc)?, out)?;
        }
    }
    Ok(())
}

/// JSON record written by `evaluate`.
#[derive(Debug, Serialize)]
pub struct EvaluationRecord {
    #[serde(flatten)]
    pub result: EvaluationResult,
    pub policy: String,
    pub reward: String,
    pub family: Family,
    pub c: f64,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmcr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn cmd_evaluate(f: &Flags, out: &mut dyn Write) -> Outcome {
    let reward = parse_reward(f.reward.as_deref())?;
    let family = f.family.unwrap_or(Family::Bernoulli);
    let c = single("--c", capacities(f)?)?;
    let ratio = match ratios(f)?.as_slice() {
        [r] => *r,
        _ => return config_err("evaluate takes a single --p or --nmcr value"),
    };
    let arrivals = ratio
        .distribution(family, c)
        .or_else(|e| config_err(e.to_string()))?;
    let p = arrivals.mcr();
    let policy_name = f
        .policy
        .as_deref()
        .unwrap_or("maximin")
        .trim()
        .to_ascii_lowercase();
    let method = f
        .method
        .unwrap_or(if family == Family::Bernoulli && policy_name != "optimal" {
            MethodArg::Series
        } else {
            MethodArg::Vi
        });
    let policy = if policy_name == "optimal" {
        if method != MethodArg::Vi {
            return config_err("--policy optimal needs --method vi");
        }
        None
    } else {
        let choice: PolicyChoice = policy_name
            .parse()
            .or_else(|e: Error| config_err(e.to_string()))?;
        Some(choice.build(&reward, p)?)
    };
    let mut record = EvaluationRecord {
        result: EvaluationResult {
            method: crate::evaluation::Method::BernoulliSeries,
            value: 0.0,
            stderr: None,
            residual: None,
            tolerance: 0.0,
        },
        policy: policy
            .as_ref()
            .map_or_else(|| "optimal".to_owned(), Policy::label),
        reward: reward.label(),
        family,
        c,
        p,
        nmcr: arrivals.nmcr().ok(),
        n: None,
        paths: None,
        grid_n: None,
        seed: None,
    };
    record.result = match method {
        MethodArg::Series => {
            if family != Family::Bernoulli {
                return config_err("the series method needs --family bernoulli");
            }
            let tol = positive("tol", f.tol.unwrap_or(1e-14))?;
            bernoulli_reward(policy.as_ref().expect("checked above"), &reward, c, p, tol)?
        }
        MethodArg::Mc => {
            let n = positive_count("n", f.n.unwrap_or(100_000))?;
            let paths = positive_count("paths", f.paths.unwrap_or(64))?;
            let seed = f.seed.unwrap_or(0);
            record.n = Some(n);
            record.paths = Some(paths);
            record.seed = Some(seed);
            simulate(
                policy.as_ref().expect("checked above"),
                &arrivals,
                &reward,
                n,
                paths,
                seed,
            )?
        }
        MethodArg::Vi => {
            let grid_n = positive_count("grid-N", f.grid_n.unwrap_or(2000))?;
            let eps = positive("eps", f.eps.unwrap_or(1e-9))?;
            record.grid_n = Some(grid_n);
            let model = build_mdp(&reward, &arrivals, grid_n)?;
            match &policy {
                Some(pol) => model.policy_gain(pol, eps)?,
                None => model.optimal_gain(eps)?.result,
            }
        }
    };
    match f.format.unwrap_or(Format::Json) {
        Format::Json => emit(f.out.as_deref(), &json_bytes(&record)?, out),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                method: String,
                value: f64,
                stderr: Option<f64>,
                residual: Option<f64>,
                tolerance: f64,
                policy: &'a str,
                family: Family,
                c: f64,
                p: f64,
            }
            let r = &record;
            let row = Row {
                method: r.result.method.to_string(),
                value: r.result.value,
                stderr: r.result.stderr,
                residual: r.result.residual,
                tolerance: r.result.tolerance,
                policy: &r.policy,
                family: r.family,
                c: r.c,
                p: r.p,
            };
            emit(f.out.as_deref(), &csv_bytes(&[row])?, out)
        }
    }
}

fn cmd_sweep(f: &Flags, out: &mut dyn Write) -> Outcome {
    let reward = parse_reward(f.reward.as_deref())?;
    let family = f.family.unwrap_or(Family::Bernoulli);
    let c_grid = capacities(f)?;
    let ratios = ratios(f)?;
    if family == Family::Bernoulli && ratios.iter().any(|r| matches!(r, Ratio::Nmcr(_))) {
        return config_err("Bernoulli arrivals are parameterised by --p only");
    }
    let mut config = SweepConfig::new(reward, family, c_grid, ratios);
    if let Some(list) = &f.policy {
        config.policies = list
            .split(',')
            .map(|s| s.parse::<PolicyChoice>())
            .collect::<Result<_, _>>()
            .or_else(|e| config_err(e.to_string()))?;
    }
    config.vi = ViSettings {
        grid_n: positive_count("grid-N", f.grid_n.unwrap_or(2000))?,
        eps: positive("eps", f.eps.unwrap_or(1e-9))?,
    };
    config.series_tol = positive("tol", f.tol.unwrap_or(1e-14))?;
    for r in &config.ratios {
        // surface bad ratios as configuration errors before any work starts
        if let Err(e) = r.distribution(config.family, config.c_grid[0]) {
            return config_err(e.to_string());
        }
    }
    let reports = sweep(&config)?;
    for r in &reports {
        if let Err(e) = r.check() {
            return Err(Failure::Invariant(format!(
                "{} c={} p={} {}: {e}",
                r.family, r.c, r.p, r.policy
            )));
        }
    }
    let bytes = match f.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_bytes(&reports)?,
        Format::Json => json_bytes(&reports)?,
    };
    emit(f.out.as_deref(), &bytes, out)
}

fn cmd_verify(f: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let mut settings = VerifySettings::default();
    if let Some(seed) = f.seed {
        settings.seed = seed;
    }
    settings.filter = f.filter.clone();
    let json = f.format == Some(Format::Json);
    let report = verify::run_with(&settings, |r| {
        if !json {
            let _ = writeln!(out, "{r}");
        }
    });
    if report.checks.is_empty() {
        return config_err("no verify checks match the filter");
    }
    if json {
        #[derive(Serialize)]
        struct Line<'a> {
            module: &'a str,
            name: &'a str,
            passed: bool,
            detail: String,
        }
        let lines: Vec<Line> = report
            .checks
            .iter()
            .map(|c| Line {
                module: c.module,
                name: c.name,
                passed: c.passed(),
                detail: match &c.outcome {
                    Ok(s) => s.clone(),
                    Err(e) => e.to_string(),
                },
            })
            .collect();
        emit(f.out.as_deref(), &json_bytes(&lines)?, out)?;
    } else {
        let passed = report.checks.iter().filter(|c| c.passed()).count();
        writeln!(out, "{passed}/{} checks passed", report.checks.len())?;
    }
    match report.first_failure() {
        None => Ok(()),
        Some(c) => {
            let _ = writeln!(err, "first failure: {c}");
            Err(Failure::Invariant(format!("{}/{}", c.module, c.name)))
        }
    }
}
