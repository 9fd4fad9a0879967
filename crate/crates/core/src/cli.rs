//! Command-line front end. Every command prints one record: JSON by
//! default, or a CSV / two-column plot table.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::distributions::{
    conditional_moment, dist_a_dn, dist_a_limit, intro_pmf_s, mixture_table, moment_by_summation,
    moment_finite, moment_limit, parity_probability, seln_pmf, sha_pmf, Parity, Pmf,
    DEFAULT_PRECISION,
};
use crate::enumeration::{
    count_mis_closed, enumerate_mis_with, intersection_histogram, intersection_histogram_in,
    isotropic_lines, verify_fibers_in, EnumConfig,
};
use crate::error::{Error, Result};
use crate::field::FpVec;
use crate::linalg::Subspace;
use crate::montecarlo::TrialPlan;
use crate::qspace::{make_hyperbolic, make_quarter_block, QuadraticSpace};
use crate::sampler::{sample_mis_uniform, xsel_sampler, BernoulliSum, DEFAULT_EPS};
use crate::stats::{chi_square_gof, mean_and_stderr, ChiSquare};
use crate::tower::{build_tower, estimate_limit_pmf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "isoform",
    version,
    about = "Random maximal isotropic subspaces and Selmer-group laws"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Omit the header line of CSV and plot output
    #[arg(long, global = true)]
    pub no_header: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100_000, global = true)]
    pub trials: u64,
    #[arg(long, default_value_t = 1, global = true)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plot,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number of maximal isotropic subspaces of H^n, closed form and enumeration
    Count(CountArgs),
    #[command(subcommand)]
    Pmf(PmfKind),
    #[command(subcommand)]
    Sample(SampleKind),
    #[command(subcommand)]
    Verify(VerifySuite),
}

#[derive(Args, Debug, Serialize)]
pub struct CountArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct PrimeLevel {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct LimitArgs {
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 10)]
    pub dmax: u32,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct ShaArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 0)]
    pub r: u32,
    #[arg(long, default_value_t = 5)]
    pub nmax: u32,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct SelnArgs {
    /// Squarefree modulus
    #[arg(long)]
    pub n: u64,
    /// Dimensions per prime, e.g. `2=1,3=1`
    #[arg(long)]
    pub dims: String,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
}

#[derive(Subcommand, Debug)]
pub enum PmfKind {
    /// Exact law of X_n
    Finite(PrimeLevel),
    /// Law of X_{Sel_p}
    Limit(LimitArgs),
    /// Law of dim Sha[p] for rank r
    Sha(ShaArgs),
    /// Probability that Sel_n has the given p-ranks
    Seln(SelnArgs),
    /// The conjectured law of s = dim Sel_p, evaluated term by term
    Intro(LimitArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct XselArgs {
    #[arg(long)]
    pub p: u64,
    /// Total-variation budget for the truncation
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct TowerArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub levels: usize,
}

#[derive(Subcommand, Debug)]
pub enum SampleKind {
    /// Uniform maximal isotropic subspaces of H^n, tallied by dim(Z ∩ W)
    Mis(PrimeLevel),
    Xn(PrimeLevel),
    Xsel(XselArgs),
    /// Compatible chains through the truncation tower
    Tower(TowerArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct MomentArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 4)]
    pub m: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct QuarterArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum VerifySuite {
    Fibers(PrimeLevel),
    Histogram(PrimeLevel),
    Parity(PrimeLevel),
    Moments(MomentArgs),
    Mixture(LimitArgs),
    Quarter(QuarterArgs),
}

/// The JSON document printed for a successful run.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: &'static str,
    #[serde(flatten)]
    pub outputs: Map<String, Value>,
}

/// Axis labels and `(x, y)` points for `--format plot`.
type PlotData = ([&'static str; 2], Vec<(String, String)>);

/// What a command produced, before formatting.
struct Report {
    outputs: Map<String, Value>,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    plot: Option<PlotData>,
    passed: Option<bool>,
}

impl Report {
    fn new(outputs: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        let Value::Object(outputs) = outputs else {
            panic!("report payload must be an object");
        };
        Report {
            outputs,
            header,
            rows,
            plot: None,
            passed: None,
        }
    }

    fn plot(mut self, x: usize, y: usize) -> Self {
        let points = self
            .rows
            .iter()
            .map(|r| (r[x].clone(), r[y].clone()))
            .collect();
        self.plot = Some(([self.header[x], self.header[y]], points));
        self
    }
}

/// Parses `args`, runs the command and writes to `out` / `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let context = json!({ "argv": argv_strings(&args) });
            let rendered = e.to_string();
            let body = rendered.split("\n\nUsage:").next().unwrap_or_default();
            let message = body
                .trim_start_matches("error: ")
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            write_error(err, "invalid_arguments", &message, context);
            return 2;
        }
    };
    let (command, params, seed) = describe(&cli);
    match execute(&cli) {
        Ok(report) => {
            let passed = report.passed;
            if let Err(e) = emit(&cli, command, params, seed, report, out) {
                write_error(
                    err,
                    e.code(),
                    &e.to_string(),
                    json!({ "argv": argv_strings(&args) }),
                );
                return 2;
            }
            match passed {
                Some(false) => 1,
                _ => 0,
            }
        }
        Err(e) => {
            let context = json!({ "command": command, "params": params });
            write_error(err, e.code(), &e.to_string(), context);
            2
        }
    }
}

/// Plain decimal for moderate magnitudes, scientific notation otherwise; both round-trip.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-5..1e16).contains(&x.abs()) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn argv_strings(args: &[OsString]) -> Vec<String> {
    args.iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect()
}

fn write_error(err: &mut dyn Write, code: &str, message: &str, context: Value) {
    let body = json!({ "error": { "code": code, "message": message, "context": context } });
    let _ = writeln!(err, "{body}");
}

fn to_params<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("argument structs serialize")
}

fn describe(cli: &Cli) -> (String, Value, Option<u64>) {
    let sampling = |args: Value| {
        let mut map = match args {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        map.insert("trials".into(), json!(cli.trials));
        map.insert("workers".into(), json!(cli.workers));
        Value::Object(map)
    };
    let seed = Some(cli.seed.unwrap_or(0));
    match &cli.command {
        Command::Count(a) => ("count".into(), to_params(a), None),
        Command::Pmf(kind) => match kind {
            PmfKind::Finite(a) => ("pmf finite".into(), to_params(a), None),
            PmfKind::Limit(a) => ("pmf limit".into(), to_params(a), None),
            PmfKind::Sha(a) => ("pmf sha".into(), to_params(a), None),
            PmfKind::Seln(a) => ("pmf seln".into(), to_params(a), None),
            PmfKind::Intro(a) => ("pmf intro".into(), to_params(a), None),
        },
        Command::Sample(kind) => match kind {
            SampleKind::Mis(a) => ("sample mis".into(), sampling(to_params(a)), seed),
            SampleKind::Xn(a) => ("sample xn".into(), sampling(to_params(a)), seed),
            SampleKind::Xsel(a) => ("sample xsel".into(), sampling(to_params(a)), seed),
            SampleKind::Tower(a) => ("sample tower".into(), sampling(to_params(a)), seed),
        },
        Command::Verify(suite) => match suite {
            VerifySuite::Fibers(a) => ("verify fibers".into(), to_params(a), None),
            VerifySuite::Histogram(a) => ("verify histogram".into(), to_params(a), None),
            VerifySuite::Parity(a) => ("verify parity".into(), to_params(a), None),
            VerifySuite::Moments(a) => ("verify moments".into(), to_params(a), None),
            VerifySuite::Mixture(a) => ("verify mixture".into(), to_params(a), None),
            VerifySuite::Quarter(a) => ("verify quarter".into(), to_params(a), None),
        },
    }
}

fn emit(
    cli: &Cli,
    command: String,
    params: Value,
    seed: Option<u64>,
    report: Report,
    out: &mut dyn Write,
) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidArgument(format!("cannot write output: {e}"));
    match cli.format {
        Format::Json => {
            let record = RunRecord {
                command,
                params,
                seed,
                version: VERSION,
                outputs: report.outputs,
            };
            let text = serde_json::to_string_pretty(&record).expect("record serializes");
            writeln!(out, "{text}").map_err(io)
        }
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::InvalidArgument(format!("cannot write csv: {e}"));
            if !cli.no_header {
                writer.write_record(&report.header).map_err(csv_err)?;
            }
            for row in &report.rows {
                writer.write_record(row).map_err(csv_err)?;
            }
            let bytes = writer.into_inner().map_err(|e| io(e.into_error()))?;
            out.write_all(&bytes).map_err(io)
        }
        Format::Plot => {
            let Some((header, points)) = report.plot else {
                return Err(Error::InvalidArgument(format!(
                    "--format plot is not available for `{command}`"
                )));
            };
            if !cli.no_header {
                writeln!(out, "# {} {}", header[0], header[1]).map_err(io)?;
            }
            for (x, y) in points {
                writeln!(out, "{x} {y}").map_err(io)?;
            }
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<Report> {
    let plan = TrialPlan::new(cli.seed.unwrap_or(0), cli.trials).with_workers(cli.workers);
    match &cli.command {
        Command::Count(a) => cmd_count(a),
        Command::Pmf(kind) => cmd_pmf(kind),
        Command::Sample(kind) => {
            if cli.trials == 0 {
                return Err(Error::InvalidArgument("--trials must be positive".into()));
            }
            cmd_sample(kind, &plan)
        }
        Command::Verify(suite) => cmd_verify(suite),
    }
}

fn cmd_count(a: &CountArgs) -> Result<Report> {
    let closed = count_mis_closed(a.p, a.n)?;
    let config = EnumConfig::from_env();
    let enumerated = if a.p < 256 && closed <= BigUint::from(config.max_canonicalizations) {
        let space = make_hyperbolic(a.p, a.n as usize)?;
        Some(enumerate_mis_with(&space, &config)?.len())
    } else {
        None
    };
    let matches = enumerated.map(|e| BigUint::from(e) == closed);
    let cell = |v: Option<String>| v.unwrap_or_default();
    Ok(Report::new(
        json!({ "closed": closed.to_string(), "enumerated": enumerated, "match": matches }),
        vec!["closed", "enumerated", "match"],
        vec![vec![
            closed.to_string(),
            cell(enumerated.map(|e| e.to_string())),
            cell(matches.map(|m| m.to_string())),
        ]],
    ))
}

fn pmf_report(pmf: &Pmf) -> Report {
    let exact: Option<Vec<String>> = pmf
        .probs_exact
        .as_ref()
        .map(|probs| probs.iter().map(|r| r.to_string()).collect());
    let outputs = json!({
        "support": pmf.support,
        "probs_exact": exact,
        "probs_float": pmf.probs_float,
        "tail_mass_bound": pmf.tail_mass_bound,
        "precision": pmf.precision,
    });
    let points = pmf
        .support
        .iter()
        .zip(&pmf.probs_float)
        .map(|(d, f)| (d.to_string(), num(*f)))
        .collect();
    let mut report = match &pmf.probs_exact {
        Some(probs) => Report::new(
            outputs,
            vec!["d", "prob_num", "prob_den"],
            pmf.support
                .iter()
                .zip(probs)
                .map(|(d, r)| vec![d.to_string(), r.numer().to_string(), r.denom().to_string()])
                .collect(),
        ),
        None => Report::new(
            outputs,
            vec!["d", "prob"],
            pmf.support
                .iter()
                .zip(&pmf.probs_float)
                .map(|(d, f)| vec![d.to_string(), num(*f)])
                .collect(),
        ),
    };
    report.plot = Some((["d", "prob"], points));
    report
}

fn cmd_pmf(kind: &PmfKind) -> Result<Report> {
    match kind {
        PmfKind::Finite(a) => Ok(pmf_report(&dist_a_dn(a.p, a.n)?)),
        PmfKind::Limit(a) => Ok(pmf_report(&dist_a_limit(a.p, a.dmax, a.precision)?)),
        PmfKind::Intro(a) => Ok(pmf_report(&intro_pmf_s(a.p, a.dmax, a.precision)?)),
        PmfKind::Sha(a) => Ok(pmf_report(&sha_pmf(a.p, a.r, a.nmax, a.precision)?)),
        PmfKind::Seln(a) => {
            let dims = parse_dims(&a.dims)?;
            let prob = seln_pmf(a.n, &dims, a.precision)?;
            let dims_json: BTreeMap<String, u64> =
                dims.iter().map(|(q, d)| (q.to_string(), *d)).collect();
            Ok(Report::new(
                json!({ "n": a.n, "dims": dims_json, "prob": prob, "precision": a.precision }),
                vec!["n", "dims", "prob"],
                vec![vec![a.n.to_string(), a.dims.clone(), num(prob)]],
            ))
        }
    }
}

fn parse_dims(text: &str) -> Result<BTreeMap<u64, u64>> {
    let bad = || Error::InvalidArgument(format!("--dims expects `prime=dim,...`, got `{text}`"));
    let mut dims = BTreeMap::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (q, d) = part.split_once('=').ok_or_else(bad)?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if dims.insert(q, d).is_some() {
            return Err(Error::InvalidArgument(format!(
                "prime {q} listed twice in --dims"
            )));
        }
    }
    Ok(dims)
}

/// `span(e_1..e_n)` in `H^n`.
fn standard_lagrangian(p: u8, n: usize) -> Subspace {
    Subspace::span(p, 2 * n, (0..n).map(|i| FpVec::unit(p, 2 * n, i)))
        .expect("unit vectors have matching length")
}

#[derive(Serialize)]
struct SampleRow {
    d: usize,
    count: u64,
    empirical: f64,
    expected: f64,
}

fn sample_report(counts: &[u64], expected: &[f64], mut extra: Map<String, Value>) -> Report {
    let trials: u64 = counts.iter().sum();
    let cells = counts.len().max(expected.len());
    let rows: Vec<SampleRow> = (0..cells)
        .map(|d| {
            let count = counts.get(d).copied().unwrap_or(0);
            SampleRow {
                d,
                count,
                empirical: count as f64 / trials as f64,
                expected: expected.get(d).copied().unwrap_or(0.0),
            }
        })
        .collect();
    let chi = chi_square_gof(counts, expected);
    extra.insert("trials".into(), json!(trials));
    extra.insert(
        "rows".into(),
        serde_json::to_value(&rows).expect("rows serialize"),
    );
    extra.insert("chi_square".into(), chi_json(&chi));
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                r.count.to_string(),
                num(r.empirical),
                num(r.expected),
            ]
        })
        .collect();
    Report::new(
        Value::Object(extra),
        vec!["d", "count", "empirical", "expected"],
        table,
    )
    .plot(0, 2)
}

fn chi_json(chi: &ChiSquare) -> Value {
    serde_json::to_value(chi).expect("chi-square serializes")
}

fn cmd_sample(kind: &SampleKind, plan: &TrialPlan) -> Result<Report> {
    match kind {
        SampleKind::Mis(a) => {
            let space = make_hyperbolic(a.p, a.n as usize)?;
            let w = standard_lagrangian(space.prime(), a.n as usize);
            let counts = plan.histogram(|rng| {
                sample_mis_uniform(&space, rng)
                    .expect("hyperbolic spaces are weakly metabolic")
                    .intersection_dim(&w)
            });
            let expected = dist_a_dn(a.p, a.n)?.probs_float;
            Ok(sample_report(&counts, &expected, Map::new()))
        }
        SampleKind::Xn(a) => {
            let sampler = BernoulliSum::new(a.p, a.n as usize)?;
            let counts = plan.histogram(|rng| sampler.sample(rng));
            let expected = dist_a_dn(a.p, a.n)?.probs_float;
            Ok(sample_report(&counts, &expected, Map::new()))
        }
        SampleKind::Xsel(a) => {
            let sampler = xsel_sampler(a.p, a.eps)?;
            let counts = plan.histogram(|rng| sampler.sample(rng));
            let top = counts.len().max(8) as u32 - 1;
            let expected = dist_a_limit(a.p, top, DEFAULT_PRECISION)?.probs_float;
            let values: Vec<f64> = (0..counts.len())
                .map(|d| (a.p as f64).powi(d as i32))
                .collect();
            let (mean, stderr) = mean_and_stderr(&values, &counts);
            let mut extra = Map::new();
            extra.insert("truncation".into(), json!(sampler.len()));
            extra.insert(
                "mean_p_pow_x".into(),
                json!({ "empirical": mean, "stderr": stderr, "expected": (a.p + 1) as f64 }),
            );
            Ok(sample_report(&counts, &expected, extra))
        }
        SampleKind::Tower(a) => {
            let tower = build_tower(a.p, a.levels)?;
            let estimate = estimate_limit_pmf(&tower, plan)?;
            let rows = estimate
                .level_changes
                .iter()
                .map(|c| {
                    vec![
                        c.level.to_string(),
                        c.changes.to_string(),
                        num(c.fraction),
                        num(c.expected),
                        num(c.z),
                    ]
                })
                .collect();
            let outputs = serde_json::to_value(&estimate).expect("estimate serializes");
            Ok(Report::new(
                outputs,
                vec!["level", "changes", "fraction", "expected", "z"],
                rows,
            )
            .plot(0, 2))
        }
    }
}

#[derive(Serialize)]
struct Check {
    identity: String,
    lhs: String,
    rhs: String,
    tolerance: String,
    pass: bool,
}

impl Check {
    fn exact(identity: impl Into<String>, lhs: impl ToString, rhs: impl ToString) -> Check {
        let (lhs, rhs) = (lhs.to_string(), rhs.to_string());
        Check {
            identity: identity.into(),
            pass: lhs == rhs,
            lhs,
            rhs,
            tolerance: "exact".into(),
        }
    }
}

fn verify_report(suite: &str, checks: Vec<Check>) -> Report {
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    let rows = checks
        .iter()
        .map(|c| {
            vec![
                c.identity.clone(),
                c.lhs.clone(),
                c.rhs.clone(),
                c.tolerance.clone(),
                c.pass.to_string(),
            ]
        })
        .collect();
    let mut report = Report::new(
        json!({ "suite": suite, "checks": serde_json::to_value(&checks).expect("checks serialize"), "pass": pass }),
        vec!["identity", "lhs", "rhs", "tolerance", "pass"],
        rows,
    );
    report.passed = Some(pass);
    report
}

fn rational_list(values: &[BigRational]) -> String {
    let items: Vec<String> = values.iter().map(|r| r.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn pad(mut values: Vec<BigRational>, len: usize) -> Vec<BigRational> {
    values.resize(len.max(values.len()), BigRational::zero());
    values
}

fn cmd_verify(suite: &VerifySuite) -> Result<Report> {
    let config = EnumConfig::from_env();
    match suite {
        VerifySuite::Fibers(a) => {
            let space = make_hyperbolic(a.p, a.n as usize)?;
            let all = enumerate_mis_with(&space, &config)?;
            let mut checks = Vec::new();
            for x in isotropic_lines(&space) {
                let check = verify_fibers_in(&all, &x, &config)?;
                let sizes: Vec<String> = check
                    .sizes
                    .iter()
                    .map(|(s, k)| format!("{k} of size {s}"))
                    .collect();
                checks.push(Check {
                    identity: format!("fibers of push_mis along {x}"),
                    lhs: sizes.join(", "),
                    rhs: format!("all of size {}", check.expected),
                    tolerance: "exact".into(),
                    pass: check.holds(),
                });
            }
            Ok(verify_report("fibers", checks))
        }
        VerifySuite::Histogram(a) => {
            let space = make_hyperbolic(a.p, a.n as usize)?;
            let all = enumerate_mis_with(&space, &config)?;
            let exact = dist_a_dn(a.p, a.n)?
                .probs_exact
                .expect("finite law is exact");
            let mut checks = Vec::new();
            for w in all.members() {
                let probs = intersection_histogram_in(&all, w)?.probabilities();
                let len = probs.len().max(exact.len());
                checks.push(Check::exact(
                    format!("histogram of dim(Z ∩ W) / #I for W = {w}"),
                    rational_list(&pad(probs, len)),
                    rational_list(&pad(exact.clone(), len)),
                ));
            }
            Ok(verify_report("histogram", checks))
        }
        VerifySuite::Parity(a) => {
            let even = parity_probability(a.p, a.n, Parity::Even)?;
            let odd = parity_probability(a.p, a.n, Parity::Odd)?;
            let pmf = dist_a_dn(a.p, a.n)?
                .probs_exact
                .expect("finite law is exact");
            let summed: BigRational = pmf.iter().step_by(2).cloned().sum();
            Ok(verify_report(
                "parity",
                vec![
                    Check::exact(
                        format!("sum of P(X_{} = d) over even d", a.n),
                        &summed,
                        "1/2",
                    ),
                    Check::exact(format!("(G(1) + G(-1)) / 2 for X_{}", a.n), &even, "1/2"),
                    Check::exact(format!("(G(1) - G(-1)) / 2 for X_{}", a.n), &odd, "1/2"),
                ],
            ))
        }
        VerifySuite::Moments(a) => {
            let mut checks = Vec::new();
            for m in 0..=a.m {
                checks.push(Check::exact(
                    format!("E(p^({m} X_{})) closed form vs summation", a.n),
                    moment_finite(a.p, a.n, m)?,
                    moment_by_summation(a.p, a.n, m)?,
                ));
            }
            checks.push(Check::exact(
                "E(p^X_Sel) = p + 1",
                moment_limit(a.p, 1)?,
                a.p + 1,
            ));
            for m in 0..=a.m.min(a.n) {
                let unconditional = moment_finite(a.p, a.n, m)?;
                let even = conditional_moment(a.p, a.n, m, Parity::Even)?;
                let odd = conditional_moment(a.p, a.n, m, Parity::Odd)?;
                if m < a.n {
                    checks.push(Check::exact(
                        format!("E(p^({m} X_{}) | even) = E(p^({m} X_{}))", a.n, a.n),
                        &even,
                        &unconditional,
                    ));
                    checks.push(Check::exact(
                        format!("E(p^({m} X_{}) | odd) = E(p^({m} X_{}))", a.n, a.n),
                        &odd,
                        &unconditional,
                    ));
                } else if m > 0 {
                    checks.push(Check {
                        identity: format!(
                            "E(p^({m} X_{}) | even) differs from E(p^({m} X_{})) at m = n",
                            a.n, a.n
                        ),
                        pass: even != unconditional,
                        lhs: even.to_string(),
                        rhs: unconditional.to_string(),
                        tolerance: "must differ".into(),
                    });
                }
            }
            Ok(verify_report("moments", checks))
        }
        VerifySuite::Mixture(a) => {
            let tolerance = 2f64.powi(8 - a.precision as i32);
            let checks = mixture_table(a.p, a.dmax, a.precision)?
                .into_iter()
                .map(|row| Check {
                    identity: format!(
                        "a_{} = P(X_Sha,{} = {}) / 2",
                        row.d,
                        row.d % 2,
                        row.d - row.d % 2
                    ),
                    lhs: num(row.a_d),
                    rhs: num(row.half_sha),
                    tolerance: format!("{tolerance:e}"),
                    pass: row.residual < tolerance,
                })
                .collect();
            Ok(verify_report("mixture", checks))
        }
        VerifySuite::Quarter(a) => {
            let (quarter, base) = quarter_histograms(a.n, &config)?;
            let len = quarter.len().max(base.len() + 1);
            let mut shifted = vec![0u64; len];
            for (d, c) in base.iter().enumerate() {
                shifted[d + 1] = *c;
            }
            let mut quarter = quarter;
            quarter.resize(len, 0);
            Ok(verify_report(
                "quarter",
                vec![Check::exact(
                    format!(
                        "histogram of quarter_block({}) = histogram of H^{} shifted by 1",
                        a.n,
                        a.n - 1
                    ),
                    format!("{quarter:?}"),
                    format!("{shifted:?}"),
                )],
            ))
        }
    }
}

/// Intersection counts with a fixed maximal isotropic subspace, for the quarter block and for `H^{n-1}`.
pub fn quarter_histograms(n: usize, config: &EnumConfig) -> Result<(Vec<u64>, Vec<u64>)> {
    let quarter = make_quarter_block(n)?;
    let reference = quarter_lagrangian(&quarter)?;
    let base = make_hyperbolic(2, n - 1)?;
    let h_quarter = intersection_histogram_in(&enumerate_mis_with(&quarter, config)?, &reference)?;
    let h_base = intersection_histogram(&base, &standard_lagrangian(2, n - 1))?;
    let dense = |h: &crate::enumeration::Histogram| (0..=h.max_dim()).map(|d| h.count(d)).collect();
    Ok((dense(&h_quarter), dense(&h_base)))
}

/// `span(v, e_2..e_n)` in the quarter block with basis `u, v, e_2..e_n, f_2..f_n`.
fn quarter_lagrangian(space: &QuadraticSpace) -> Result<Subspace> {
    let dim = space.dim();
    let n = dim / 2;
    let w = Subspace::span(2, dim, (1..=n).map(|i| FpVec::unit(2, dim, i)))?;
    if !space.is_maximal_isotropic(&w)? {
        return Err(Error::NotMaximalIsotropic);
    }
    Ok(w)
}
