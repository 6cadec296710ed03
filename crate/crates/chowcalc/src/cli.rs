//! Command-line surface: argument parsing, report assembly, and
//! deterministic rendering.
//!
//! Every subcommand produces a report with four parts (command, echoed
//! input, results, checks) rendered either as indented text or as JSON
//! whose maps are all key-sorted, so identical configurations produce
//! byte-identical output. Exit code 0 means every check passed, 2 means
//! some check failed, and 1 means the invocation itself was invalid; usage
//! errors go to the diagnostic stream and never to stdout.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{Map, Value};

use crate::chern::BundleSpec;
use crate::decomp::{
    corollary_suite_cy, corollary_suite_hyp, cy_pipeline, desk_cap, hyp_pipeline,
    verify_allgamma, Check,
};
use crate::partitions::{count_with_isolated, enumerate, identity_sum, stirling2};
use crate::ring::{format_rat, monomial_key, rat, Rat, TruncPoly};
use crate::schubert::fano;

/// Top-level argument structure.
#[derive(Parser)]
#[command(name = "chowcalc", version, about = "Exact diagonal-decomposition calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    output: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Three-factor diagonal identity of a Calabi-Yau complete intersection.
    Cy(CyArgs),
    /// Recursion pipeline for a hypersurface of degree at least n + 2.
    Hyp(HypArgs),
    /// Batch verification suites.
    Verify(VerifyArgs),
    /// Expected dimension and count of lines on a complete intersection.
    Lines(LinesArgs),
    /// Set partitions of {1..r} and their counting identities.
    Partitions(PartitionsArgs),
}

#[derive(Args)]
struct CyArgs {
    /// Comma-separated degrees of the defining equations.
    #[arg(long, value_delimiter = ',', conflicts_with = "chern")]
    degrees: Vec<u32>,
    /// Comma-separated Chern coefficients gamma_1,..,gamma_r (non-split
    /// data), each an integer or num/den rational.
    #[arg(long, value_delimiter = ',')]
    chern: Option<Vec<String>>,
    /// Dimension of X.
    #[arg(short = 'n', long)]
    dim: u32,
    /// Also compute the residual polynomial and its checks (split only).
    #[arg(long)]
    with_p: bool,
    /// Also run the symbolic product suite (implies --with-p).
    #[arg(long)]
    products: bool,
}

#[derive(Args)]
struct HypArgs {
    /// Dimension of X.
    #[arg(short = 'n', long)]
    dim: u32,
    /// Degree of X; must be at least dim + 2.
    #[arg(short = 'd', long)]
    degree: u32,
    /// Include residual polynomials in the recursion.
    #[arg(long)]
    with_p: bool,
    /// Also run the symbolic product suite (implies --with-p).
    #[arg(long)]
    products: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Alternating surjection-count identities.
    Stirling,
    /// Closed form of the single-point coefficients of gamma_a.
    Allgamma,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum)]
    suite: Suite,
    /// Largest m for the stirling suite.
    #[arg(long, default_value_t = 12)]
    m_max: usize,
    /// Dimension of X for the allgamma suite.
    #[arg(short = 'n', long)]
    dim: Option<u32>,
    /// Degree of X for the allgamma suite.
    #[arg(short = 'd', long)]
    degree: Option<u32>,
    /// Largest tuple length for the allgamma suite; defaults to min(k, 5).
    #[arg(long)]
    r_max: Option<usize>,
}

#[derive(Args)]
struct LinesArgs {
    /// Comma-separated degrees of the defining equations.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<u32>,
    /// Dimension of the ambient projective space.
    #[arg(long, required = true)]
    ambient: u32,
}

#[derive(Args)]
struct PartitionsArgs {
    /// Size of the ground set, at most 8.
    #[arg(short = 'r', long)]
    ground: usize,
    /// Number of blocks; all block counts when omitted.
    #[arg(short = 's', long)]
    blocks: Option<usize>,
}

/// Assembled report; the four sections serialize in fixed, sorted order.
struct Report {
    command: &'static str,
    input: Map<String, Value>,
    results: Map<String, Value>,
    checks: Vec<Check>,
}

impl Report {
    fn new(command: &'static str) -> Report {
        Report { command, input: Map::new(), results: Map::new(), checks: Vec::new() }
    }

    /// JSON value with key-sorted maps at every level.
    fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("lhs".into(), Value::String(c.lhs.clone()));
                m.insert("name".into(), Value::String(c.name.clone()));
                m.insert("pass".into(), Value::Bool(c.pass));
                m.insert("rhs".into(), Value::String(c.rhs.clone()));
                Value::Object(m)
            })
            .collect();
        let mut top = Map::new();
        top.insert("checks".into(), Value::Array(checks));
        top.insert("command".into(), Value::String(self.command.to_string()));
        top.insert("input".into(), Value::Object(self.input.clone()));
        top.insert("results".into(), Value::Object(self.results.clone()));
        Value::Object(top)
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())
                    .expect("report serialization cannot fail");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "chowcalc {}", self.command);
        if !self.input.is_empty() {
            let _ = writeln!(s, "input:");
            for (k, v) in &self.input {
                write_value(&mut s, 1, k, v);
            }
        }
        if !self.results.is_empty() {
            let _ = writeln!(s, "results:");
            for (k, v) in &self.results {
                write_value(&mut s, 1, k, v);
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "checks:");
            let mut passed = 0;
            for c in &self.checks {
                let tag = if c.pass {
                    passed += 1;
                    "pass"
                } else {
                    "FAIL"
                };
                let _ = writeln!(s, "  [{tag}] {}: {} vs {}", c.name, c.lhs, c.rhs);
            }
            let _ = writeln!(s, "summary: {passed} of {} checks passed", self.checks.len());
        }
        s
    }

    fn exit_code(&self) -> u8 {
        if self.checks.iter().all(|c| c.pass) {
            0
        } else {
            2
        }
    }
}

/// Writes one key-value row of the text report, recursing into objects.
fn write_value(s: &mut String, indent: usize, key: &str, v: &Value) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            let _ = writeln!(s, "{pad}{key}:");
            for (k2, v2) in m {
                write_value(s, indent + 1, k2, v2);
            }
        }
        Value::Array(items) => {
            let flat: Vec<String> = items.iter().map(scalar_text).collect();
            let _ = writeln!(s, "{pad}{key}: {}", flat.join(", "));
        }
        other => {
            let _ = writeln!(s, "{pad}{key}: {}", scalar_text(other));
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(x) => x.clone(),
        other => other.to_string(),
    }
}

/// Parses an integer or num/den rational.
fn parse_rat(s: &str) -> Result<Rat, String> {
    let t = s.trim();
    let parse_int = |p: &str| -> Result<num_bigint::BigInt, String> {
        p.trim().parse().map_err(|_| format!("invalid integer '{p}'"))
    };
    match t.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(t)?)),
        Some((num, den)) => {
            let n = parse_int(num)?;
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(format!("zero denominator in '{t}'"));
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Polynomial as a key-sorted monomial-to-coefficient object.
fn poly_value(p: &TruncPoly) -> Value {
    let mut m = Map::new();
    for (exps, c) in p.terms() {
        m.insert(monomial_key(exps), Value::String(format_rat(c)));
    }
    Value::Object(m)
}

fn rat_list(xs: &[Rat]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(format_rat(x))).collect())
}

fn u32_list(xs: &[u32]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::from(x)).collect())
}

/// Validates the hypersurface parameters shared by hyp and verify.
fn check_hyp_params(n: u32, d: u32) -> Result<(), String> {
    if n < 1 {
        return Err("need dim >= 1".into());
    }
    if d < n + 2 {
        return Err(format!("need degree >= dim + 2; got degree {d}, dim {n}"));
    }
    let k = d + 1 - n;
    let cap = desk_cap();
    if k > cap || n > cap {
        return Err(format!(
            "k = {k} or n = {n} beyond the cap {cap}; set CHOWCALC_MAX_K to raise it"
        ));
    }
    Ok(())
}

fn run_cy(args: &CyArgs) -> Result<Report, String> {
    let n = args.dim;
    if n < 1 {
        return Err("need dim >= 1".into());
    }
    let with_p = args.with_p || args.products;
    let mut report = Report::new("cy");
    let spec = match &args.chern {
        Some(strs) => {
            if with_p {
                return Err("the residual polynomial needs split degrees, not --chern".into());
            }
            let g = strs.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>, _>>()?;
            report.input.insert(
                "chern".into(),
                Value::Array(g.iter().map(|x| Value::String(format_rat(x))).collect()),
            );
            BundleSpec::ChernClasses(g)
        }
        None => {
            if args.degrees.is_empty() {
                return Err("need exactly one of --degrees or --chern".into());
            }
            if args.degrees.iter().any(|&d| d < 1) {
                return Err("degrees must be >= 1".into());
            }
            report.input.insert("degrees".into(), u32_list(&args.degrees));
            BundleSpec::Split(args.degrees.clone())
        }
    };
    let rank = spec.rank();
    if rank as u32 > n + 1 {
        return Err(format!("rank {rank} exceeds dim + 1 = {}", n + 1));
    }
    let want_c1 = rat(n as i64 + rank as i64 + 1);
    if spec.c1() != want_c1 {
        return Err(format!(
            "not Calabi-Yau data: c1 = {}, need n + r + 1 = {}",
            format_rat(&spec.c1()),
            format_rat(&want_c1)
        ));
    }
    report.input.insert("dim".into(), Value::from(n));
    report.input.insert("with_p".into(), Value::Bool(with_p));

    let cy = cy_pipeline(&spec, n, with_p);
    report.results.insert("N".into(), Value::String(format_rat(&cy.big_n)));
    report.results.insert("a".into(), rat_list(&cy.q.a));
    report.results.insert("deg_X".into(), Value::String(format_rat(&cy.deg_x)));
    report.results.insert("main2_verdict".into(), Value::Bool(cy.main2_verdict));
    if let Some(p) = &cy.p_poly {
        report.results.insert("P".into(), poly_value(p));
    }
    report.checks = cy.checks.clone();
    if args.products {
        report.checks.extend(corollary_suite_cy(&cy));
    }
    Ok(report)
}

fn run_hyp(args: &HypArgs) -> Result<Report, String> {
    let (n, d) = (args.dim, args.degree);
    check_hyp_params(n, d)?;
    let with_p = args.with_p || args.products;
    let hyp = hyp_pipeline(n, d, with_p);

    let mut report = Report::new("hyp");
    report.input.insert("degree".into(), Value::from(d));
    report.input.insert("dim".into(), Value::from(n));
    report.input.insert("with_p".into(), Value::Bool(with_p));
    report.results.insert("k".into(), Value::from(hyp.k));
    let mut lambda = Map::new();
    lambda.insert("1".into(), Value::String(format_rat(&hyp.lambda1)));
    for (j, v) in &hyp.lambda {
        lambda.insert(j.to_string(), Value::String(format_rat(v)));
    }
    report.results.insert("lambda".into(), Value::Object(lambda));
    report.results.insert("gamma_coeff".into(), Value::String(format_rat(&hyp.gamma_coeff)));
    report.results.insert("gamma_vanishes".into(), Value::Bool(hyp.gamma_vanishes));
    report.results.insert("case_notes".into(), Value::String(hyp.case_notes.clone()));
    report.results.insert("lambda0_note".into(), Value::String(hyp.lambda0_note.clone()));
    if let Some(p) = &hyp.p_poly {
        report.results.insert("P".into(), poly_value(p));
    }
    report.checks = hyp.checks.clone();
    if args.products {
        report.checks.extend(corollary_suite_hyp(&hyp));
    }
    Ok(report)
}

fn run_verify(args: &VerifyArgs) -> Result<Report, String> {
    let mut report = Report::new("verify");
    match args.suite {
        Suite::Stirling => {
            if args.m_max < 2 {
                return Err("need m_max >= 2".into());
            }
            report.input.insert("m_max".into(), Value::from(args.m_max as u64));
            report.input.insert("suite".into(), Value::String("stirling".into()));
            for m in 2..=args.m_max {
                let v = identity_sum(m);
                report.checks.push(Check::new(
                    format!("identity_sum_{m}"),
                    v.is_zero(),
                    format_rat(&v),
                    "0",
                ));
            }
        }
        Suite::Allgamma => {
            let n = args.dim.ok_or("the allgamma suite needs --dim")?;
            let d = args.degree.ok_or("the allgamma suite needs --degree")?;
            check_hyp_params(n, d)?;
            let k = d + 1 - n;
            let r_max = args.r_max.unwrap_or((k as usize).min(5));
            if r_max < 2 || r_max as u32 > k {
                return Err(format!("r_max must lie in 2..=k = {k}"));
            }
            report.input.insert("degree".into(), Value::from(d));
            report.input.insert("dim".into(), Value::from(n));
            report.input.insert("r_max".into(), Value::from(r_max as u64));
            report.input.insert("suite".into(), Value::String("allgamma".into()));
            report.checks = verify_allgamma(n, d, r_max);
        }
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    report.results.insert("failed".into(), Value::from((report.checks.len() - passed) as u64));
    report.results.insert("passed".into(), Value::from(passed as u64));
    Ok(report)
}

fn run_lines(args: &LinesArgs) -> Result<Report, String> {
    if args.degrees.iter().any(|&d| d < 1) {
        return Err("degrees must be >= 1".into());
    }
    if args.ambient < 2 {
        return Err("lines need an ambient projective space of dimension >= 2".into());
    }
    if args.ambient > 20 {
        return Err("ambient dimension beyond the desk range (max 20)".into());
    }
    let nn = args.ambient + 1;
    let data = fano(&args.degrees, nn);

    let mut report = Report::new("lines");
    report.input.insert("ambient".into(), Value::from(args.ambient));
    report.input.insert("degrees".into(), u32_list(&args.degrees));
    report.results.insert("expected_dim".into(), Value::from(data.expected_dim));

    let is_cy = args.degrees.iter().sum::<u32>() == args.ambient + 1;
    if is_cy {
        let n = args.ambient as i64 - args.degrees.len() as i64;
        report.checks.push(Check::new(
            "fano_dim_n_minus_3",
            data.expected_dim == n - 3,
            data.expected_dim.to_string(),
            (n - 3).to_string(),
        ));
    }
    match &data.degree {
        Some(count) => {
            report.results.insert("count".into(), Value::String(format_rat(count)));
            let anchor = match (args.degrees.as_slice(), args.ambient) {
                ([5], 4) => Some(rat(2875)),
                ([3], 3) => Some(rat(27)),
                _ => None,
            };
            match anchor {
                Some(want) => report.checks.push(Check::new(
                    "line_count_anchor",
                    *count == want,
                    format_rat(count),
                    format_rat(&want),
                )),
                None => {
                    report.results.insert(
                        "count_note".into(),
                        Value::String("engine output without an external anchor".into()),
                    );
                }
            }
        }
        None => {
            report.results.insert(
                "count_note".into(),
                Value::String("count defined only at expected dimension zero".into()),
            );
        }
    }
    Ok(report)
}

fn run_partitions(args: &PartitionsArgs) -> Result<Report, String> {
    let r = args.ground;
    if !(1..=8).contains(&r) {
        return Err("ground-set size must lie in 1..=8".into());
    }
    let s_values: Vec<usize> = match args.blocks {
        Some(s) => {
            if !(1..=r).contains(&s) {
                return Err(format!("block count must lie in 1..={r}"));
            }
            vec![s]
        }
        None => (1..=r).collect(),
    };

    let mut report = Report::new("partitions");
    report.input.insert("ground".into(), Value::from(r as u64));
    if let Some(s) = args.blocks {
        report.input.insert("blocks".into(), Value::from(s as u64));
    }

    let mut counts = Map::new();
    let mut total = Rat::zero();
    for &s in &s_values {
        let parts = enumerate(r, s);
        let expected = stirling2(r, s);
        total += &expected;
        counts.insert(s.to_string(), Value::String(format_rat(&expected)));
        report.checks.push(Check::new(
            format!("enumerate_count_{r}_{s}"),
            rat(parts.len() as i64) == expected,
            parts.len().to_string(),
            format_rat(&expected),
        ));
        let isolated = count_with_isolated(r, s);
        let want = if r >= 1 && s >= 1 { stirling2(r - 1, s - 1) } else { Rat::zero() };
        report.checks.push(Check::new(
            format!("isolated_count_{r}_{s}"),
            isolated == want,
            format_rat(&isolated),
            format_rat(&want),
        ));
        if s_values.len() == 1 && parts.len() <= 60 {
            let listed: Vec<Value> = parts
                .iter()
                .map(|p| {
                    let blocks: Vec<String> = p
                        .blocks()
                        .iter()
                        .map(|b| {
                            b.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
                        })
                        .collect();
                    Value::String(blocks.join("|"))
                })
                .collect();
            report.results.insert("partitions".into(), Value::Array(listed));
        }
    }
    report.results.insert("counts".into(), Value::Object(counts));
    if args.blocks.is_none() {
        report.results.insert("total".into(), Value::String(format_rat(&total)));
    }
    Ok(report)
}

/// Parses the argument list and runs the selected command. Returns the exit
/// code and the text destined for stdout; usage diagnostics go to stderr
/// inside, and `--out` redirects the report to a file.
pub fn run_from<I, T>(args: I) -> (u8, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (0, e.to_string());
            }
            eprint!("{e}");
            return (1, String::new());
        }
    };
    let built = match &cli.command {
        Command::Cy(a) => run_cy(a),
        Command::Hyp(a) => run_hyp(a),
        Command::Verify(a) => run_verify(a),
        Command::Lines(a) => run_lines(a),
        Command::Partitions(a) => run_partitions(a),
    };
    let report = match built {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("chowcalc: {msg}");
            return (1, String::new());
        }
    };
    let rendered = report.render(cli.output);
    let code = report.exit_code();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("chowcalc: cannot write {}: {e}", path.display());
                return (1, String::new());
            }
            (code, String::new())
        }
        None => (code, rendered),
    }
}

/// Binary entry point: runs on the process arguments and prints the report.
pub fn main_entry() -> u8 {
    let (code, out) = run_from(std::env::args_os());
    print!("{out}");
    code
}
