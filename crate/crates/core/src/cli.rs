//! Command-line interface of the `khinlab` binary.
//!
//! Exit status: 0 success, 1 suite failures, 2 bad input, 3 dimension over
//! the enumeration limit, 4 weight below the mode threshold.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::coeffs::CoefficientVector;
use crate::constants::{haagerup_bq, zero_mass_threshold, ThresholdMode};
use crate::decimal::Decimal;
use crate::engine::{Engine, MomentReport};
use crate::error::Error;
use crate::montecarlo::{mc_moment, McConfig};
use crate::verifier::{counterexample_demo, run_suite, CaseGenerator, Suite};
use crate::weight::Weight;
use crate::weighted::extract_constants;

pub const SCHEMA_VERSION: u32 = 1;
/// Significant digits of printed constants.
pub const CONSTANT_DIGITS: usize = 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "khinlab", version, about = "Weighted Khintchine constants and exact checks")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Enumeration limit (overrides KHINLAB_NMAX).
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Absolute moments E|wξ|^p and norms ‖wξ‖_p.
    Moments(MomentsArgs),
    /// Haagerup constants and the Euler-constant limit.
    Constants(ConstantsArgs),
    /// Explicit sandwich constants for a weight.
    Extract(ExtractArgs),
    /// Run a randomized check suite.
    Verify(VerifyArgs),
    /// The s = 1/2 weight that defeats the lower bound.
    Counterexample,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    /// Coefficients: JSON array or one decimal per line.
    pub coeffs: PathBuf,
    /// Exponents (repeat or separate with commas).
    #[arg(long = "p", required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Vec<String>,
    /// Weight file (JSON).
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Enumerate all sign patterns.
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Monte Carlo estimate.
    #[arg(long)]
    pub mc: bool,
    #[arg(long, requires = "mc")]
    pub samples: Option<u64>,
    #[arg(long, requires = "mc")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("what").required(true).multiple(true)))]
pub struct ConstantsArgs {
    /// Print B_q (q >= 2).
    #[arg(long, group = "what", allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Compare B_q^{-2q/(q-2)} near q = 2 with 2e^{-2+γ}.
    #[arg(long, group = "what")]
    pub limit_check: bool,
    /// Print 1 - 2e^{-2+γ}.
    #[arg(long, group = "what")]
    pub zero_mass: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long = "p", allow_hyphen_values = true)]
    pub p: String,
    #[arg(long = "q", allow_hyphen_values = true)]
    pub q: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Classic)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Classic,
    Refined,
}

impl From<ModeArg> for ThresholdMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Classic => ThresholdMode::Classic,
            ModeArg::Refined => ThresholdMode::Refined,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 100)]
    pub cases: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A command's result: the canonical JSON plus flat rows for CSV and
/// human output.
struct Output {
    json: Value,
    rows: Vec<Vec<(String, String)>>,
    exit: i32,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionTooLarge { .. } => EXIT_DIMENSION,
            Error::BelowThreshold { .. } => EXIT_THRESHOLD,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_failure(message: String) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute(&cli, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs a parsed command, writing the report to `--out` or `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let engine = match cli.nmax {
        Some(n) => Engine::new(n),
        None => Engine::from_env(),
    };
    let result = match &cli.command {
        Command::Moments(a) => cmd_moments(a, &engine),
        Command::Constants(a) => cmd_constants(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Counterexample => Ok(cmd_counterexample()),
    };
    match result {
        Ok(output) => {
            let text = render(&output, cli.format);
            let written = match &cli.out {
                Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INPUT;
            }
            if output.exit == EXIT_FAILURES {
                let _ = writeln!(err, "suite reported failures");
            }
            output.exit
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

/// JSON array of decimal strings (or numbers), or one decimal per line;
/// blank lines and `#` comments are skipped.
pub fn parse_coefficients(text: &str) -> Result<CoefficientVector, Error> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let entries: Vec<Decimal> = serde_json::from_str(trimmed)
            .map_err(|e| Error::InvalidCoefficients(e.to_string()))?;
        return CoefficientVector::new(entries);
    }
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    CoefficientVector::parse(&lines)
}

fn load_weight(path: &Path) -> Result<Weight, Failure> {
    Ok(Weight::from_json(&read_file(path)?)?)
}

fn positive(name: &'static str, d: &Decimal) -> Result<f64, Failure> {
    let v = d.value();
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain {
            name,
            value: v,
            expected: "a positive finite number",
        }
        .into())
    }
}

fn envelope(command: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    map.insert("command".into(), json!(command));
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    Value::Object(map)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Rounds to [`CONSTANT_DIGITS`] significant digits.
pub fn significant(x: f64) -> f64 {
    format!("{:.*e}", CONSTANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flat_row(v: &Value) -> Vec<(String, String)> {
    let mut row = Vec::new();
    flatten_into("", v, &mut row);
    row
}

fn flatten_into(prefix: &str, v: &Value, row: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, x, row);
            }
        }
        other => row.push((prefix.to_string(), cell(other))),
    }
}

fn cmd_moments(a: &MomentsArgs, engine: &Engine) -> Result<Output, Failure> {
    let coeffs = parse_coefficients(&read_file(&a.coeffs)?)?;
    let weight = a.weight.as_deref().map(load_weight).transpose()?;
    let ps = a
        .p
        .iter()
        .map(|t| Decimal::parse(t.trim()).map_err(Failure::from))
        .collect::<Result<Vec<_>, _>>()?;
    let use_mc = a.mc || (!a.exact && coeffs.len().max(weight.as_ref().map_or(0, Weight::depth)) > engine.n_max());
    let cfg = McConfig {
        sample_count: a.samples.unwrap_or(McConfig::default().sample_count),
        seed: a.seed.unwrap_or(0),
        ..McConfig::default()
    };
    let mut results = Vec::with_capacity(ps.len());
    let mut rows = Vec::with_capacity(ps.len());
    for p in &ps {
        let pv = positive("p", p)?;
        let report: MomentReport = if use_mc {
            mc_moment(&coeffs, pv, weight.as_ref(), &cfg)?
        } else {
            engine.exact_moment(&coeffs, pv, weight.as_ref())?
        };
        let mut entry = json!({ "p_input": p.text() });
        if let (Value::Object(e), Value::Object(r)) = (&mut entry, to_value(&report)) {
            e.extend(r);
        }
        rows.push(flat_row(&entry));
        results.push(entry);
    }
    let mut body = json!({
        "coefficients": coeffs.texts(),
        "results": results,
    });
    if let Some(w) = &weight {
        body["weight"] = to_value(w);
    }
    if use_mc {
        body["monte_carlo"] = to_value(&cfg);
    }
    Ok(Output {
        json: envelope("moments", body),
        rows,
        exit: EXIT_OK,
    })
}

fn constant_entry(name: &str, input: Option<&str>, value: f64) -> Value {
    json!({
        "name": name,
        "input": input,
        "value": significant(value),
        "value_f64": value,
    })
}

fn cmd_constants(a: &ConstantsArgs) -> Result<Output, Failure> {
    let mut entries = Vec::new();
    if let Some(text) = &a.q {
        let q = Decimal::parse(text.trim())?;
        let b = haagerup_bq(q.value())?;
        entries.push(constant_entry("B_q", Some(q.text()), b));
    }
    let z = zero_mass_threshold();
    if a.limit_check {
        entries.push(constant_entry(
            "B_q^(-2q/(q-2))",
            Some(&z.check_q.to_string()),
            z.numeric_limit_check,
        ));
        entries.push(constant_entry("2e^(-2+gamma)", None, z.limit));
        entries.push(constant_entry(
            "limit_check_gap",
            None,
            (z.numeric_limit_check - z.limit).abs(),
        ));
    }
    if a.zero_mass {
        entries.push(constant_entry("1-2e^(-2+gamma)", None, z.exact));
    }
    let rows = entries
        .iter()
        .map(|e| {
            vec![
                ("name".into(), cell(&e["name"])),
                ("input".into(), cell(&e["input"])),
                ("value".into(), cell(&e["value"])),
            ]
        })
        .collect();
    Ok(Output {
        json: envelope("constants", json!({ "digits": CONSTANT_DIGITS, "constants": entries })),
        rows,
        exit: EXIT_OK,
    })
}

fn cmd_extract(a: &ExtractArgs) -> Result<Output, Failure> {
    let weight = load_weight(&a.weight)?;
    let p = Decimal::parse(a.p.trim())?;
    let q = Decimal::parse(a.q.trim())?;
    let report = extract_constants(&weight, positive("p", &p)?, positive("q", &q)?, a.mode.into())?;
    let value = to_value(&report);
    let row = flat_row(&value);
    Ok(Output {
        json: envelope(
            "extract",
            json!({
                "weight": weight,
                "p_input": p.text(),
                "q_input": q.text(),
                "report": value,
            }),
        ),
        rows: vec![row],
        exit: EXIT_OK,
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Output, Failure> {
    let suite: Suite = a.suite.parse()?;
    let report = run_suite(&CaseGenerator::new(a.seed), suite, a.cases);
    let summary = vec![
        ("suite".to_string(), suite.to_string()),
        ("seed".into(), report.seed.to_string()),
        ("case_count".into(), report.case_count.to_string()),
        ("pass_count".into(), report.pass_count.to_string()),
        ("wall_time_seconds".into(), format!("{:.3}", report.wall_time_seconds)),
    ];
    let failure_cols = |f: Option<&crate::verifier::Failure>| -> Vec<(String, String)> {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        vec![
            ("failure_index".into(), f.map_or(String::new(), |f| f.index.to_string())),
            ("case_seed".into(), f.map_or(String::new(), |f| f.case_seed.to_string())),
            ("expected".into(), f.map_or(String::new(), |f| opt(f.expected))),
            ("observed".into(), f.map_or(String::new(), |f| opt(f.observed))),
            ("detail".into(), f.map_or(String::new(), |f| f.detail.clone())),
        ]
    };
    let rows = if report.failures.is_empty() {
        vec![summary.iter().cloned().chain(failure_cols(None)).collect()]
    } else {
        report
            .failures
            .iter()
            .map(|f| summary.iter().cloned().chain(failure_cols(Some(f))).collect())
            .collect()
    };
    let exit = if report.passed() { EXIT_OK } else { EXIT_FAILURES };
    Ok(Output {
        json: envelope("verify", json!({ "report": report })),
        rows,
        exit,
    })
}

fn cmd_counterexample() -> Output {
    let report = counterexample_demo();
    let mut rows = Vec::new();
    for (label, pair) in [("corrected", &report.corrected), ("literal", &report.literal)] {
        for n in &pair.norms {
            rows.push(vec![
                ("pair".into(), label.to_string()),
                ("coefficients".into(), pair.coefficients.join(" ")),
                ("p".into(), n.p.to_string()),
                ("weighted_norm".into(), n.norm.to_string()),
                ("l2_norm".into(), significant(pair.l2_norm).to_string()),
                ("exactly_zero".into(), pair.weighted_sum_vanishes.to_string()),
            ]);
        }
    }
    for r in &report.rejections {
        rows.push(vec![
            ("pair".into(), format!("{} mode", r.mode)),
            ("coefficients".into(), String::new()),
            ("p".into(), String::new()),
            ("weighted_norm".into(), format!("s = {}", r.s)),
            ("l2_norm".into(), format!("threshold = {}", significant(r.threshold))),
            ("exactly_zero".into(), format!("rejected = {}", r.rejected)),
        ]);
    }
    Output {
        json: envelope("counterexample", json!({ "report": report })),
        rows,
        exit: EXIT_OK,
    }
}

fn render(output: &Output, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output.json).expect("json");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(&output.rows),
        Format::Human => render_table(&output.rows),
    }
}

fn columns(rows: &[Vec<(String, String)>]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for row in rows {
        for (k, _) in row {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn lookup<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    row.iter()
        .find(|(k, _)| k == key)
        .map_or("", |(_, v)| v.as_str())
}

fn render_csv(rows: &[Vec<(String, String)>]) -> String {
    let cols = columns(rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols).expect("in-memory csv");
    for row in rows {
        w.write_record(cols.iter().map(|c| lookup(row, c)))
            .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
}

fn render_table(rows: &[Vec<(String, String)>]) -> String {
    let cols = columns(rows);
    let widths: Vec<usize> = cols
        .iter()
        .map(|c| {
            rows.iter()
                .map(|r| lookup(r, c).chars().count())
                .chain(std::iter::once(c.chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: Vec<&str>| -> String {
        let mut s = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(cols.iter().map(String::as_str).collect());
    for row in rows {
        out.push_str(&line(cols.iter().map(|c| lookup(row, c)).collect()));
    }
    out
}
