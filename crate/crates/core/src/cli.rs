//! Command-line front end.
//!
//! Exit status is 0 on success, 1 when validation fails (bad tableau,
//! disagreeing counts, exhausted budget) and 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::conditions::{self, LoadOptions, Tableau};
use crate::ode;
use crate::stumps::{self, CountRow};

const AFTER_HELP: &str = "\
Formats (see FORMATS.md):
  tableau    JSON {s, sqrt_discriminant?, c, A, b, name?}; entries are \"p/q\" or \"p/q|r/s\" (p/q + r/s*sqrt(d))
  count      TSV with header p, m_p, M_p, n_p, N_p; or JSON {rows: [...]}
  classes    JSON {order, classes: [{signature: [[m,n],...], members: [tree,...]}]}
  verify     text key=value lines, or JSON OrderReport
  convergence CSV header h,error then rows, closed by '# slope=<value>'
Trees are written as nested brackets, e.g. [[],[[]]].
ISOMER_THREADS caps the number of worker threads.";

#[derive(Parser, Debug)]
#[command(
    name = "isomer",
    version,
    about = "Isomeric trees and scalar versus vector Runge-Kutta order",
    after_help = AFTER_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count trees (m_p) and isomeric classes (n_p) up to an order, as TSV.
    Count(CountArgs),
    /// List the isomeric classes of one order as JSON.
    Classes(ClassesArgs),
    /// Vector order, scalar order, ambiguity and D(1) status of a tableau.
    Verify(VerifyArgs),
    /// Order-condition residuals for |t| <= ORDER and degree <= DEGREE.
    Residuals(ResidualsArgs),
    /// Endpoint errors and fitted order on a spiral test problem, as CSV.
    Convergence(ConvergenceArgs),
    /// Print a built-in tableau as a JSON document.
    Builtin(BuiltinArgs),
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct MethodSource {
    /// Tableau JSON file.
    #[arg(long)]
    pub tableau: Option<PathBuf>,
    /// Built-in method: euler, rk4, fake5, fake6.
    #[arg(long)]
    pub builtin: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CountMethod {
    Enumerate,
    Recurrence,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Csv,
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_order: u64,
    #[arg(long, value_enum, default_value_t = CountMethod::Recurrence)]
    pub method: CountMethod,
    /// Wall-time limit for the enumeration path.
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ClassesArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub order: u64,
    /// Above this order only class sizes are listed.
    #[arg(long, default_value_t = 10)]
    pub member_cap: usize,
    /// Audit every class up to ORDER for members that D(1) cannot reduce.
    #[arg(long)]
    pub d1_audit: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: MethodSource,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_order: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Add decimal renderings next to exact values.
    #[arg(long)]
    pub approx: bool,
    #[arg(long)]
    pub allow_inconsistent_rows: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ResidualsArgs {
    #[command(flatten)]
    pub source: MethodSource,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub order: u64,
    #[arg(long)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub approx: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    SpiralScalar,
    SpiralVector,
}

#[derive(Args, Debug)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub source: MethodSource,
    #[arg(long, value_enum)]
    pub problem: ProblemName,
    /// `h_min,h_max,count`: step sizes log-equally spaced.
    #[arg(long, default_value = "0.0316227766,0.1778279410,4")]
    pub grid: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BuiltinArgs {
    /// Method name; omit to list the available names.
    pub name: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure that maps to exit status 1.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn load_method(src: &MethodSource, allow_inconsistent_rows: bool) -> Result<Tableau, Failure> {
    let opts = LoadOptions { allow_inconsistent_rows };
    match (&src.tableau, &src.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            Tableau::from_json_str(&text, opts).map_err(|e| Failure(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => Ok(conditions::builtin(name)?),
        (None, None) => Err(Failure("no method given".into())),
    }
}

fn big_json(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn count_rows_json(rows: &[CountRow]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "p": r.p,
                "m_p": big_json(&r.m),
                "M_p": big_json(&r.m_total),
                "n_p": big_json(&r.n),
                "N_p": big_json(&r.n_total),
            })
        })
        .collect();
    json!({ "rows": rows })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn cmd_count(args: &CountArgs, err: &mut dyn Write) -> Result<String, Failure> {
    let p = args.max_order as usize;
    let budget = match args.budget_seconds {
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => return Err(Failure(format!("invalid budget {s}"))),
        None => None,
    };
    let rows = match args.method {
        CountMethod::Recurrence => stumps::count_by_recurrence(p),
        CountMethod::Enumerate => stumps::count_by_enumeration(p, budget)?,
        CountMethod::Both => {
            let rec = stumps::count_by_recurrence(p);
            let en = stumps::count_by_enumeration(p, budget)?;
            if let Some((a, b)) = rec.iter().zip(&en).find(|(a, b)| a != b) {
                return Err(Failure(format!(
                    "methods disagree at p = {}: recurrence ({}, {}) vs enumeration ({}, {})",
                    a.p, a.m, a.n, b.m, b.n
                )));
            }
            let _ = writeln!(err, "recurrence and enumeration agree for p <= {p}");
            rec
        }
    };
    Ok(match args.format {
        Format::Json => pretty(&count_rows_json(&rows)),
        _ => stumps::count_table_tsv(&rows),
    })
}

fn cmd_classes(args: &ClassesArgs) -> Result<String, Failure> {
    let p = args.order as usize;
    if args.d1_audit {
        return Ok(pretty(&conditions::d1_class_audit(p).to_json()));
    }
    Ok(pretty(&stumps::classes_json(p, args.member_cap)?))
}

fn cmd_verify(args: &VerifyArgs) -> Result<String, Failure> {
    let tab = load_method(&args.source, args.allow_inconsistent_rows)?;
    let p = args.max_order as usize;
    if !tab.rows_consistent() {
        let v = conditions::vector_order(&tab, p);
        let msg = "scalar order refused: rows violate c_i = sum_j a_ij";
        return Ok(match args.format {
            Format::Json => pretty(&json!({ "max_order": p, "vector_order": v, "scalar_order": null, "note": msg })),
            _ => format!("max_order={p}\nvector_order={v}\nscalar_order=refused\n# {msg}\n"),
        });
    }
    let report = conditions::order_report(&tab, p)?;
    Ok(match args.format {
        Format::Json => pretty(&report.to_json(args.approx)),
        _ => report.to_text(args.approx),
    })
}

fn cmd_residuals(args: &ResidualsArgs) -> Result<String, Failure> {
    let tab = load_method(&args.source, false)?;
    let report = conditions::residual_report(&tab, args.order as usize, args.degree);
    Ok(match args.format {
        Format::Json => pretty(&json!({
            "order": args.order,
            "degree": args.degree,
            "residuals": report.iter().map(|r| r.to_json(args.approx)).collect::<Vec<_>>(),
        })),
        _ => {
            let mut out = String::new();
            for r in &report {
                let label = match &r.subject {
                    conditions::Subject::Tree(t) => format!("tree  {t}"),
                    conditions::Subject::Class { signature, .. } => format!("class {signature}"),
                };
                let value = if args.approx {
                    format!("{} (≈ {:.6e})", r.value, r.value.to_f64())
                } else {
                    r.value.to_string()
                };
                out.push_str(&format!("p={} deg={} {label} residual={value}\n", r.order, r.degree));
            }
            out
        }
    })
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Failure(format!("grid must be h_min,h_max,count, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

fn cmd_convergence(args: &ConvergenceArgs, err: &mut dyn Write) -> Result<String, Failure> {
    let tab = load_method(&args.source, false)?;
    let prob = match args.problem {
        ProblemName::SpiralScalar => ode::spiral_scalar(),
        ProblemName::SpiralVector => ode::spiral_vector(),
    };
    let (h_min, h_max, count) = parse_grid(&args.grid)?;
    let steps = ode::step_grid(&prob, h_min, h_max, count)?;
    let result = ode::convergence_study(&tab, &prob, &steps)?;
    let _ = writeln!(err, "slope={:.4}", result.slope);
    Ok(result.to_csv())
}

fn cmd_builtin(args: &BuiltinArgs) -> Result<String, Failure> {
    match &args.name {
        None => Ok(conditions::BUILTIN_NAMES.join("\n") + "\n"),
        Some(name) => Ok(pretty(&conditions::builtin_json(name)?)),
    }
}

fn output_of(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Count(a) => &a.out,
        Command::Classes(a) => &a.out,
        Command::Verify(a) => &a.out,
        Command::Residuals(a) => &a.out,
        Command::Convergence(a) => &a.out,
        Command::Builtin(a) => &a.out,
    }
}

/// Executes a parsed command, writing results to `out` (or the `--output`
/// file) and diagnostics to `err`. Returns the exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Count(a) => cmd_count(a, err),
        Command::Classes(a) => cmd_classes(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Residuals(a) => cmd_residuals(a),
        Command::Convergence(a) => cmd_convergence(a, err),
        Command::Builtin(a) => cmd_builtin(a),
    };
    match result {
        Ok(text) => {
            let written = match &output_of(&cli.command).output {
                Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    1
                }
            }
        }
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("isomer").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&[]).0, 2);
        assert_eq!(call(&["count", "--max-order", "0"]).0, 2);
        assert_eq!(call(&["verify", "--max-order", "5"]).0, 2);
        assert_eq!(call(&["verify", "--builtin", "rk4", "--tableau", "x.json"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("count"));
    }

    #[test]
    fn validation_failures_exit_1() {
        let (code, _, err) = call(&["verify", "--builtin", "nope"]);
        assert_eq!(code, 1);
        assert!(err.contains("unknown built-in"));
        assert_eq!(call(&["verify", "--tableau", "/nonexistent/tab.json"]).0, 1);
        assert_eq!(call(&["convergence", "--builtin", "rk4", "--problem", "spiral-scalar", "--grid", "1,2"]).0, 1);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.0316, 0.178,4").unwrap(), (0.0316, 0.178, 4));
        assert!(parse_grid("a,b,c").is_err());
    }
}
