//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a verification check fails (or on an
//! internal error), 2 on usage and guard errors.

pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache;
use crate::chern::sym_cubic_chern;
use crate::error::{Error, Result};
use crate::kp::kp_nodal;
use crate::recursion::Engine;
use crate::reference::{closed_form_value, reference};
use crate::singularity::Configuration;
use verify::{run_suites, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "planar-enum",
    version,
    about = "Characteristic numbers of singular planar curves in P^3"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one characteristic number.
    Compute(ComputeArgs),
    /// Tabulate a family over a range of degrees, s = 0..3.
    Table(TableArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Print the Chern numbers (s1, s2, s3) of Sym^d.
    Chern {
        #[arg(long)]
        d: u32,
    },
    /// Print the embedded closed forms and check values.
    Reference {
        /// Print the raw JSON data file.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Recursion,
    Kp,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Json,
    Csv,
    Latex,
}

#[derive(Debug, clap::Args)]
pub struct ComputeArgs {
    #[arg(long)]
    pub d: u32,
    /// Configuration such as `A1^2 A2`, `A3`, `A1`, or `N` for smooth curves.
    #[arg(long, default_value = "N")]
    pub spec: String,
    /// Number of line conditions; derived from s when omitted.
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub s: u32,
    /// Divide by the number of node orderings.
    #[arg(long)]
    pub unordered: bool,
    #[arg(long, value_enum, default_value = "recursion")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
    /// Memo cache file.
    #[arg(long, env = cache::CACHE_ENV)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
    /// Compute below the proven degree bound and tag the result.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, clap::Args)]
pub struct TableArgs {
    #[arg(long)]
    pub family: String,
    /// Inclusive degree range `a..b`, or a single degree.
    #[arg(long)]
    pub d: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: TableFormat,
    #[arg(long)]
    pub unordered: bool,
    #[arg(long)]
    pub force: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = cache::CACHE_ENV)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// Suites to run (repeatable); all when omitted.
    #[arg(long = "suite", value_parser = parse_suite)]
    pub suites: Vec<Suite>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn range_tag(proven: bool) -> &'static str {
    if proven {
        "proven"
    } else {
        "unproven-range"
    }
}

/// One output record of `compute`, also used for table rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub d: u32,
    pub spec: String,
    pub r: u32,
    pub s: u32,
    pub ordered: bool,
    pub method: &'static str,
    /// Decimal string.
    pub value: String,
    /// `proven` or `unproven-range`.
    pub range: &'static str,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Recursion => "recursion",
        Method::Kp => "kp",
        Method::ClosedForm => "closed-form",
    }
}

fn node_factorial(config: Configuration) -> BigInt {
    (1..=config.nodes).map(BigInt::from).product()
}

fn unorder(value: BigInt, config: Configuration) -> Result<BigInt> {
    let f = node_factorial(config);
    if (&value % &f) != BigInt::from(0) {
        return Err(Error::NonExactDivision(format!(
            "{value} by {f} for {config}"
        )));
    }
    Ok(value / f)
}

fn check_cell(d: u32, config: Configuration, r: u32, s: u32) -> Result<()> {
    if config.condition_budget(d) != Some(r + 2 * s) {
        return Err(Error::Dimension(format!(
            "r + 2s must equal d(d+3)/2 + 3 - (δ + c) for d = {d} and {config}, got r + 2s = {}",
            r + 2 * s
        )));
    }
    Ok(())
}

/// Evaluates one cell with any method. Returns `(value, proven)`.
pub fn compute_value(
    engine: &Engine,
    method: Method,
    d: u32,
    config: Configuration,
    r: u32,
    s: u32,
    ordered: bool,
) -> Result<(BigInt, bool)> {
    match method {
        Method::Recursion => {
            let c = engine.characteristic_number(d, config, r, s, ordered)?;
            Ok((c.value, c.proven))
        }
        Method::Kp => {
            if config.extra.is_some() || config.nodes == 0 {
                return Err(Error::Unsupported(format!(
                    "the Bell-class method counts nodal curves only, got {config}"
                )));
            }
            check_cell(d, config, r, s)?;
            let proven = d >= config.d_min();
            if !proven && !engine.is_forced() {
                return Err(Error::OutsideProvenRange(format!(
                    "{config} is proven for d >= d_min = {}, got d = {d}",
                    config.d_min()
                )));
            }
            let v = kp_nodal(d, config.nodes, r, s)?;
            Ok((if ordered { v } else { unorder(v, config)? }, proven))
        }
        Method::ClosedForm => {
            check_cell(d, config, r, s)?;
            let form = reference().closed_form(config, s).ok_or_else(|| {
                Error::InvalidArgument(format!("no closed form for {config} at s = {s}"))
            })?;
            let proven = d >= form.d_min;
            let v = if proven {
                closed_form_value(config, d, s)?.1
            } else if engine.is_forced() {
                form.evaluate(d)?
            } else {
                return Err(Error::OutsideProvenRange(format!(
                    "the closed form for {config} holds for d >= {}, got d = {d}",
                    form.d_min
                )));
            };
            Ok((if ordered { v } else { unorder(v, config)? }, proven))
        }
    }
}

fn make_engine(force: bool) -> Engine {
    if force {
        Engine::forced()
    } else {
        Engine::new()
    }
}

fn cache_path(path: &Option<PathBuf>, disabled: bool) -> Option<PathBuf> {
    if disabled {
        None
    } else {
        path.clone()
    }
}

fn with_cache<T>(
    engine: &Engine,
    path: Option<PathBuf>,
    body: impl FnOnce() -> Result<T>,
) -> Result<T> {
    if let Some(p) = &path {
        engine.preload(cache::load(p)?);
    }
    let out = body()?;
    if let Some(p) = &path {
        cache::save(p, &engine.memo_entries())?;
    }
    Ok(out)
}

fn cmd_compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<()> {
    let config: Configuration = args.spec.parse()?;
    let r = match args.r {
        Some(r) => r,
        None => config.r_for(args.d, args.s).ok_or_else(|| {
            Error::Dimension(format!(
                "no valid r: 2s = {} exceeds d(d+3)/2 + 3 - (δ + c) for d = {} and {config}",
                2 * args.s,
                args.d
            ))
        })?,
    };
    let engine = make_engine(args.force);
    let ordered = !args.unordered;
    let path = if args.method == Method::Recursion {
        cache_path(&args.cache, args.no_cache)
    } else {
        None
    };
    let (value, proven) = with_cache(&engine, path, || {
        compute_value(&engine, args.method, args.d, config, r, args.s, ordered)
    })?;
    let record = Record {
        d: args.d,
        spec: config.to_string(),
        r,
        s: args.s,
        ordered,
        method: method_name(args.method),
        value: value.to_string(),
        range: range_tag(proven),
    };
    let text = match args.format {
        OutputFormat::Json => serde_json::to_string(&record).expect("serializable"),
        OutputFormat::Text => format!(
            "N({}; r={}, s={}) at d={} = {}{}{}",
            record.spec,
            r,
            args.s,
            args.d,
            record.value,
            if ordered { "" } else { " (unordered)" },
            if proven { "" } else { " [unproven-range]" }
        ),
    };
    writeln!(out, "{text}").map_err(|e| io_error("stdout", e))
}

fn io_error(path: &str, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_string(),
        message: e.to_string(),
    }
}

/// Parses `a..b` (inclusive) or a single degree.
pub fn parse_degree_range(text: &str) -> Result<std::ops::RangeInclusive<u32>> {
    let bad = || Error::Parse(format!("degree range must look like `a..b`, got `{text}`"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo.trim(), hi.trim().trim_start_matches('=')),
        None => (text.trim(), text.trim()),
    };
    let lo: u32 = lo.parse().map_err(|_| bad())?;
    let hi: u32 = hi.parse().map_err(|_| bad())?;
    Ok(lo..=hi)
}

/// Rows of a table in `(d, s)` order.
pub fn table_rows(
    engine: &Engine,
    family: Configuration,
    degrees: std::ops::RangeInclusive<u32>,
    ordered: bool,
) -> Result<Vec<Record>> {
    let cells: Vec<(u32, u32, u32)> = degrees
        .flat_map(|d| (0..=3).filter_map(move |s| family.r_for(d, s).map(|r| (d, s, r))))
        .collect();
    cells
        .into_par_iter()
        .map(|(d, s, r)| {
            let (value, proven) =
                compute_value(engine, Method::Recursion, d, family, r, s, ordered)?;
            Ok(Record {
                d,
                spec: family.to_string(),
                r,
                s,
                ordered,
                method: method_name(Method::Recursion),
                value: value.to_string(),
                range: range_tag(proven),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct JsonTable<'a> {
    family: String,
    ordered: bool,
    rows: &'a [Record],
}

pub fn render_table(
    family: Configuration,
    ordered: bool,
    rows: &[Record],
    format: TableFormat,
) -> String {
    let mut s = String::new();
    match format {
        TableFormat::Json => {
            let table = JsonTable {
                family: family.to_string(),
                ordered,
                rows,
            };
            s = serde_json::to_string_pretty(&table).expect("serializable");
            s.push('\n');
        }
        TableFormat::Csv => {
            s.push_str("d,s,r,family,ordered,value\n");
            for row in rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    row.d, row.s, row.r, row.spec, row.ordered, row.value
                );
            }
        }
        TableFormat::Latex => {
            let _ = writeln!(
                s,
                "% N({family}; r, s), {}",
                if ordered { "ordered" } else { "unordered" }
            );
            s.push_str("\\begin{tabular}{r|rrrr}\n");
            s.push_str("$d$ & $s=0$ & $s=1$ & $s=2$ & $s=3$ \\\\ \\hline\n");
            let mut degrees: Vec<u32> = rows.iter().map(|r| r.d).collect();
            degrees.dedup();
            for d in degrees {
                let cells: Vec<String> = (0..=3)
                    .map(|sv| {
                        rows.iter()
                            .find(|row| row.d == d && row.s == sv)
                            .map_or_else(|| "--".to_string(), |row| format!("${}$", row.value))
                    })
                    .collect();
                let _ = writeln!(s, "{d} & {} \\\\", cells.join(" & "));
            }
            s.push_str("\\end{tabular}\n");
        }
    }
    s
}

fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> Result<()> {
    let family: Configuration = args.family.parse()?;
    let degrees = parse_degree_range(&args.d)?;
    let engine = make_engine(args.force);
    let ordered = !args.unordered;
    let rows = with_cache(&engine, cache_path(&args.cache, args.no_cache), || {
        table_rows(&engine, family, degrees, ordered)
    })?;
    let text = render_table(family, ordered, &rows, args.format);
    match &args.output {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| io_error(&path.display().to_string(), e))
        }
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| io_error("stdout", e)),
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let suites: Vec<Suite> = if args.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suites.clone()
    };
    let report = run_suites(&suites);
    let text = match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
        OutputFormat::Text => {
            let mut s = String::new();
            for c in &report.checks {
                let _ = writeln!(s, "{c}");
            }
            for n in &report.notes {
                let _ = writeln!(s, "NOTE {n}");
            }
            let _ = writeln!(s, "{} passed, {} failed", report.passed(), report.failed());
            s
        }
    };
    out.write_all(text.as_bytes())
        .map_err(|e| io_error("stdout", e))?;
    Ok(report.exit_code())
}

fn cmd_chern(d: u32, out: &mut dyn Write) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "curve degree must be positive".into(),
        ));
    }
    let c = sym_cubic_chern(d);
    let json = serde_json::json!({
        "d": d,
        "s1": c.s1.to_string(),
        "s2": c.s2.to_string(),
        "s3": c.s3.to_string(),
    });
    writeln!(out, "{json}").map_err(|e| io_error("stdout", e))
}

fn format_factor(coeffs: &[BigInt]) -> String {
    let deg = coeffs.len().saturating_sub(1);
    let mut parts = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        if *c == BigInt::from(0) {
            continue;
        }
        let p = deg - i;
        let mono = match p {
            0 => c.to_string(),
            1 => format!("{c}d"),
            _ => format!("{c}d^{p}"),
        };
        parts.push(mono);
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

fn cmd_reference(raw: bool, out: &mut dyn Write) -> Result<()> {
    let text = if raw {
        crate::reference::raw_data().to_string()
    } else {
        let mut s = String::new();
        for form in &reference().closed_forms {
            let factors: Vec<String> = form
                .factors
                .iter()
                .map(|(c, p)| {
                    let f = format!("({})", format_factor(c));
                    if *p == 1 {
                        f
                    } else {
                        format!("{f}^{p}")
                    }
                })
                .collect();
            let body = if factors.is_empty() {
                String::new()
            } else {
                format!(" * {}", factors.join(" * "))
            };
            let _ = writeln!(
                s,
                "{} s={} d>={}: {}{}",
                form.family, form.s, form.d_min, form.scale, body
            );
        }
        for e in &reference().external {
            let _ = writeln!(
                s,
                "{} d={} {} r={} s={} {}: {}",
                e.source,
                e.d,
                e.config,
                e.r,
                e.s,
                if e.ordered { "ordered" } else { "unordered" },
                e.value
            );
        }
        s
    };
    out.write_all(text.as_bytes())
        .map_err(|e| io_error("stdout", e))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_guard() {
        EXIT_USAGE
    } else {
        EXIT_VERIFY
    }
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Compute(a) => cmd_compute(a, out).map(|_| EXIT_OK),
        Command::Table(a) => cmd_table(a, out).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Chern { d } => cmd_chern(*d, out).map(|_| EXIT_OK),
        Command::Reference { raw } => cmd_reference(*raw, out).map(|_| EXIT_OK),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["planar-enum"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn compute_examples() {
        let (code, out, _) = run_capture(&[
            "compute",
            "--d",
            "3",
            "--spec",
            "A2",
            "--r",
            "10",
            "--s",
            "0",
            "--no-cache",
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("\"value\":\"17760\""), "{out}");
        let (code, out, _) = run_capture(&[
            "compute",
            "--d",
            "2",
            "--spec",
            "A1",
            "--s",
            "3",
            "--no-cache",
        ]);
        assert_eq!(code, 0);
        assert!(
            out.contains("\"value\":\"3\"") && out.contains("\"r\":1"),
            "{out}"
        );
    }

    #[test]
    fn guard_errors_exit_with_two() {
        let (code, _, err) = run_capture(&[
            "compute",
            "--d",
            "4",
            "--spec",
            "A1^2 A2",
            "--r",
            "13",
            "--s",
            "0",
            "--unordered",
            "--no-cache",
        ]);
        assert_eq!(code, 2);
        assert!(err.contains("d_min"), "{err}");
        let (code, _, err) = run_capture(&[
            "compute",
            "--d",
            "3",
            "--spec",
            "A2",
            "--r",
            "9",
            "--s",
            "0",
            "--no-cache",
        ]);
        assert_eq!(code, 2);
        assert!(
            err.contains("r + 2s must equal d(d+3)/2 + 3 - (δ + c)"),
            "{err}"
        );
        let (code, _, _) = run_capture(&["compute", "--d", "3", "--spec", "A1^3 A2", "--s", "0"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_capture(&["compute", "--bogus"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn forced_values_are_tagged() {
        let (code, out, _) = run_capture(&[
            "compute",
            "--d",
            "4",
            "--spec",
            "A1^2 A2",
            "--r",
            "13",
            "--s",
            "0",
            "--unordered",
            "--force",
            "--no-cache",
        ]);
        assert_eq!(code, 0);
        assert!(
            out.contains("\"value\":\"10613184\"") && out.contains("unproven-range"),
            "{out}"
        );
    }

    #[test]
    fn methods_agree_on_nodal_cubics() {
        for method in ["recursion", "kp", "closed-form"] {
            let (code, out, err) = run_capture(&[
                "compute",
                "--d",
                "5",
                "--spec",
                "A1^2",
                "--s",
                "2",
                "--unordered",
                "--method",
                method,
                "--no-cache",
            ]);
            assert_eq!(code, 0, "{err}");
            let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
            let (_, want) = closed_form_value("A1^2".parse().unwrap(), 5, 2).unwrap();
            assert_eq!(v["value"], (want / BigInt::from(2)).to_string(), "{method}");
        }
        let (code, _, _) = run_capture(&[
            "compute", "--d", "5", "--spec", "A2", "--s", "2", "--method", "kp",
        ]);
        assert_eq!(code, 2);
    }

    #[test]
    fn tables() {
        let (code, out, _) = run_capture(&[
            "table",
            "--family",
            "A1",
            "--d",
            "1..5",
            "--format",
            "csv",
            "--no-cache",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "d,s,r,family,ordered,value");
        assert_eq!(lines.len(), 1 + 19);
        assert!(lines.contains(&"4,3,10,A1,true,27"));

        let (code, out, _) = run_capture(&["table", "--family", "N", "--d", "2..4", "--no-cache"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let row = v["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["d"] == 2 && r["s"] == 3)
            .unwrap();
        assert_eq!(row["value"], "1");

        let (code, out, _) = run_capture(&[
            "table",
            "--family",
            "A2",
            "--d",
            "5..4",
            "--format",
            "csv",
            "--no-cache",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "d,s,r,family,ordered,value\n");

        let (code, out, _) = run_capture(&[
            "table",
            "--family",
            "A2",
            "--d",
            "3..4",
            "--format",
            "latex",
            "--no-cache",
        ]);
        assert_eq!(code, 0);
        assert!(
            out.contains("3 & $17760$ & $2064$ & $240$ & $24$ \\\\"),
            "{out}"
        );
    }

    #[test]
    fn degree_ranges() {
        assert_eq!(parse_degree_range("1..5").unwrap(), 1..=5);
        assert_eq!(parse_degree_range("4").unwrap(), 4..=4);
        assert_eq!(parse_degree_range("2..=3").unwrap(), 2..=3);
        assert!(parse_degree_range("a..b").is_err());
    }

    #[test]
    fn chern_and_reference() {
        let (code, out, _) = run_capture(&["chern", "--d", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), r#"{"d":2,"s1":"4","s2":"10","s3":"20"}"#);
        let (code, out, _) = run_capture(&["reference"]);
        assert_eq!(code, 0);
        assert!(
            out.contains("BPS-g2 d=4 A1 r=16 s=0 ordered: 258300"),
            "{out}"
        );
        assert_eq!(
            format_factor(&[BigInt::from(1), BigInt::from(-1)]),
            "1d - 1"
        );
    }

    #[test]
    fn verify_external_suite() {
        let (code, out, _) = run_capture(&["verify", "--suite", "external"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("12 passed, 0 failed"), "{out}");
        let (code, out, _) = run_capture(&["verify", "--suite", "chern"]);
        assert_eq!(code, 0);
        assert!(
            out.contains("d=1 oracle (1,1,1) vs printed s2=12: erratum confirmed"),
            "{out}"
        );
        let (code, _, _) = run_capture(&["verify", "--suite", "nonsense"]);
        assert_eq!(code, 2);
    }
}
