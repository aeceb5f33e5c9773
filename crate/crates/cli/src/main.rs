//! `bkp`: derive operators, relations and flows of the coupled BKP hierarchy, and run
//! the verification suites.
//!
//! Exit status: 0 ok, 1 verification failure, 2 insufficient precision, 3 usage error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bkp_core::diffalg::{Axis, DiffPoly, Gen};
use bkp_core::hierarchy::{FlowKind, FlowValue, Hierarchy};
use bkp_core::json::{flow_to_json, op_to_json, poly_to_json};
use bkp_core::psido::PsiDO;
use bkp_core::verify::{overall, run_suite, CheckReport, Status, Suite};
use bkp_core::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Parser, Debug)]
#[command(name = "bkp", version, about = "Coupled BKP hierarchy: operators, flows and verification")]
struct Cli {
    /// Truncation depth K of the Lax operators and the relation table.
    #[arg(long, global = true, env = "BKP_DEPTH", default_value_t = 6)]
    depth: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized property checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Include per-check timings in verification output.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print ∂2(v_m) and ∂1(w_m) for m up to MAX_INDEX.
    Relations { max_index: Option<u32> },
    /// Print A_{i,n} or B_{i,n}.
    Operator {
        #[arg(value_parser = ["A", "B", "a", "b"])]
        kind: String,
        #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
        i: u8,
        n: u32,
    },
    /// Print the flow d/dt_{i,n} (or the reduced d/dt_n) on one generator.
    Flow {
        /// 1, 2 or "reduced".
        which: String,
        n: u32,
        /// Generator name: u, v0, v1, …, w0, w1, …
        gen: String,
    },
    /// Run a verification suite: all, lemmas, theorem, tau or nv.
    Verify {
        #[arg(default_value = "all", value_parser = ["all", "lemmas", "theorem", "tau", "nv"])]
        suite: String,
    },
    /// Same as `verify nv`.
    Nv,
}

enum Failure {
    Usage(String),
    Precision(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Precision(_) => 2,
            Failure::Usage(_) | Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Precision(m) | Failure::Verification(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InsufficientPrecision { .. } | Error::DepthExceeded { .. } => Failure::Precision(e.to_string()),
            Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Verification(e.to_string()),
        }
    }
}

/// Rendered output plus the exit status it implies.
struct Output {
    body: String,
    status: Status,
}

impl Output {
    fn ok(body: String) -> Self {
        Output { body, status: Status::Pass }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn axis(i: u8) -> Axis {
    Axis::from_index(i).expect("validated by clap")
}

fn cmd_relations(h: &Hierarchy, max_index: Option<u32>, format: Format) -> Result<Output, Failure> {
    let k = h.depth();
    let max = max_index.unwrap_or(k);
    if max > k {
        return Err(Failure::Precision(format!(
            "relations up to index {max} need depth at least {max}; current depth is {k}"
        )));
    }
    let t = h.table();
    let dv: Vec<&DiffPoly> = t.dv()[..=max as usize].iter().map(|p| p.as_ref()).collect();
    let dw: Vec<&DiffPoly> = t.dw()[..=max as usize].iter().map(|p| p.as_ref()).collect();
    let body = match format {
        Format::Json => pretty(&json!({
            "depth": k,
            "max_index": max,
            "dv": dv.iter().map(|p| poly_to_json(p)).collect::<Vec<_>>(),
            "dw": dw.iter().map(|p| poly_to_json(p)).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = String::new();
            for (m, p) in dv.iter().enumerate() {
                s.push_str(&format!("d2(v{m}) = {p}\n"));
            }
            for (l, p) in dw.iter().enumerate() {
                s.push_str(&format!("d1(w{l}) = {p}\n"));
            }
            s
        }
        Format::Latex => {
            let mut s = String::new();
            for (m, p) in dv.iter().enumerate() {
                s.push_str(&format!("\\partial_2(v_{{{m}}}) = {}\n", p.latex()));
            }
            for (l, p) in dw.iter().enumerate() {
                s.push_str(&format!("\\partial_1(w_{{{l}}}) = {}\n", p.latex()));
            }
            s
        }
    };
    Ok(Output::ok(body))
}

fn render_op(op: &PsiDO, format: Format) -> String {
    match format {
        Format::Text => format!("{op}\n"),
        Format::Latex => format!("{}\n", op.latex()),
        Format::Json => pretty(&op_to_json(op)),
    }
}

fn cmd_operator(h: &Hierarchy, kind: &str, i: u8, n: u32, format: Format) -> Result<Output, Failure> {
    let op = if kind.eq_ignore_ascii_case("a") {
        (*h.a_op(axis(i), n)?).clone()
    } else {
        h.b_op(axis(i), n)?
    };
    Ok(Output::ok(render_op(&op, format)))
}

fn cmd_flow(h: &Hierarchy, which: &str, n: u32, gen: &str, format: Format) -> Result<Output, Failure> {
    let kind = match which {
        "1" => FlowKind::Side(Axis::D1),
        "2" => FlowKind::Side(Axis::D2),
        "reduced" => FlowKind::Reduced,
        other => return Err(Failure::Usage(format!("flow index must be 1, 2 or reduced, got {other:?}"))),
    };
    let g = Gen::parse(gen).ok_or_else(|| Failure::Usage(format!("unknown generator {gen:?}")))?;
    let p = h.flow(kind, n, g)?;
    let body = match format {
        Format::Text => format!("{p}\n"),
        Format::Latex => format!("{}\n", p.latex()),
        Format::Json => {
            let mut fv = FlowValue::new(kind, n);
            fv.values.insert(g, p);
            pretty(&flow_to_json(&fv))
        }
    };
    Ok(Output::ok(body))
}

fn render_reports(reports: &[CheckReport], format: Format, timings: bool) -> String {
    if format == Format::Json {
        return pretty(&Value::Array(reports.iter().map(|r| r.to_json(timings)).collect()));
    }
    let width = reports.iter().map(|r| r.label().len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in reports {
        let k = if r.depth_used() == r.depth { format!("K={}", r.depth) } else { format!("K={}→{}", r.depth, r.depth_used()) };
        let time = if timings { format!(" {:>9.1}ms", r.elapsed.as_secs_f64() * 1e3) } else { String::new() };
        s.push_str(&format!("{:<22} {:<w$} {:<7}{time} {}\n", r.status.as_str(), r.label(), k, r.detail, w = width));
        if let Some(w) = &r.witness {
            s.push_str(&format!("    residual: {w}\n"));
        }
    }
    let count = |st: Status| reports.iter().filter(|r| r.status == st).count();
    s.push_str(&format!(
        "{} checks: {} pass, {} fail, {} insufficient precision\n",
        reports.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::InsufficientPrecision)
    ));
    s
}

fn cmd_verify(suite: &str, cli: &Cli) -> Result<Output, Failure> {
    let suite = Suite::parse(suite).ok_or_else(|| Failure::Usage(format!("unknown suite {suite:?}")))?;
    let reports = run_suite(suite, cli.depth, cli.seed);
    Ok(Output { body: render_reports(&reports, cli.format, cli.timings), status: overall(&reports) })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let needs_hierarchy = matches!(cli.command, Command::Relations { .. } | Command::Operator { .. } | Command::Flow { .. });
    let h = if needs_hierarchy { Some(Hierarchy::new(cli.depth)?) } else { None };
    match &cli.command {
        Command::Relations { max_index } => cmd_relations(h.as_ref().unwrap(), *max_index, cli.format),
        Command::Operator { kind, i, n } => cmd_operator(h.as_ref().unwrap(), kind, *i, *n, cli.format),
        Command::Flow { which, n, gen } => cmd_flow(h.as_ref().unwrap(), which, *n, gen, cli.format),
        Command::Verify { suite } => cmd_verify(suite, cli),
        Command::Nv => cmd_verify("nv", cli),
    }
}

fn emit(cli: &Cli, body: &str) -> Result<String, Failure> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(body.to_string()),
    }
}

/// Parses `args`, runs the command and returns `(exit status, stdout, stderr)`.
fn execute<I, T>(args: I) -> (u8, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() { (3, String::new(), text) } else { (0, text, String::new()) };
        }
    };
    let result = run(&cli).and_then(|o| Ok((emit(&cli, &o.body)?, o.status)));
    match result {
        Ok((out, Status::Pass)) => (0, out, String::new()),
        Ok((out, Status::Fail)) => (1, out, String::new()),
        Ok((out, Status::InsufficientPrecision)) => (2, out, String::new()),
        Err(f) => (f.code(), String::new(), format!("bkp: {}\n", f.message())),
    }
}

fn main() -> ExitCode {
    let (code, out, err) = execute(std::env::args_os());
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    let _ = std::io::stderr().lock().write_all(err.as_bytes());
    ExitCode::from(code)
}
