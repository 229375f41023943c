mod cli;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gcdsum::analytic::{
    extremal_statistic, omega_bound, summatory_scan_with, ScanOptions, Selector, SummatoryReport,
};
use gcdsum::dirichlet::{f_r_local, verify_fr_structure};
use gcdsum::gcdsum::{a_bruteforce, a_eval, a_recursion, b_bruteforce, b_closed, menon_sum};
use gcdsum::igusa::{igusa_evaluate, IgusaMethod, IgusaQuery};
use gcdsum::multfun::StandardFunction;
use gcdsum::{Error, Result};
use serde_json::json;

use cli::{
    AMethod, BMethod, Cli, Command, EvalCommand, FrTableArgs, Format, IgusaArgs, IgusaMethodArg, ScanCommand,
    ScanOutputArgs,
};

pub const DEFAULT_SEED: u64 = 20240917;

/// Everything besides the command that decides what a run writes.
struct RunConfig {
    format: Format,
    output: Option<PathBuf>,
}

/// What a command produced: the rendered primary output and whether the
/// run counts as a verification failure.
struct Outcome {
    body: String,
    failed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, failed: false }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Verification(_) => 1,
        Error::Domain(_) | Error::Numerical(_) => 3,
        Error::Resource { .. } => 4,
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Domain(format!("cannot write {}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Renders a flat record; every value is already a string or a JSON number.
fn record(format: Format, text: String, fields: &[(&str, serde_json::Value)]) -> String {
    match format {
        Format::Text => format!("{text}\n"),
        Format::Json => {
            let map: serde_json::Map<_, _> = fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            pretty(&map)
        }
        Format::Csv => {
            let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = fields
                .iter()
                .map(|(_, v)| match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
    }
}

fn cmd_eval(cmd: &EvalCommand, format: Format) -> Result<Outcome> {
    let body = match *cmd {
        EvalCommand::A { n, r, method } => {
            let (v, m) = match method {
                AMethod::Local => (a_eval(n, r)?, "local"),
                AMethod::Recursion => (a_recursion(n, r)?, "recursion"),
                AMethod::Brute => (a_bruteforce(n, r)?, "bruteforce"),
            };
            record(
                format,
                v.to_string(),
                &[("function", json!("A")), ("n", json!(n)), ("r", json!(r)), ("method", json!(m)), ("value", json!(v.to_string()))],
            )
        }
        EvalCommand::B { n, r, method } => {
            let (v, m) = match method {
                BMethod::Closed => (b_closed(n, r)?, "closed"),
                BMethod::Brute => (b_bruteforce(n, r)?, "bruteforce"),
            };
            record(
                format,
                v.to_string(),
                &[("function", json!("B")), ("n", json!(n)), ("r", json!(r)), ("method", json!(m)), ("value", json!(v.to_string()))],
            )
        }
        EvalCommand::Menon { n, a } => {
            let v = menon_sum(n, a)?;
            record(
                format,
                v.to_string(),
                &[("function", json!("menon")), ("n", json!(n)), ("a", json!(a)), ("value", json!(v.to_string()))],
            )
        }
        EvalCommand::Tau { k, n } => {
            let v = StandardFunction::parse(&format!("tau_k({k})"))?.build().eval_u64(n)?;
            record(
                format,
                v.to_string(),
                &[("function", json!("tau")), ("k", json!(k)), ("n", json!(n)), ("value", json!(v.to_string()))],
            )
        }
        EvalCommand::Fr { r, k } => {
            let poly = f_r_local(r, k)?;
            let coeffs: Vec<String> = poly.coefficients().iter().map(|c| c.to_string()).collect();
            match format {
                Format::Csv => {
                    let mut out = String::from("r,k,i,c_i\n");
                    for (i, c) in coeffs.iter().enumerate() {
                        out.push_str(&format!("{r},{k},{i},{c}\n"));
                    }
                    out
                }
                _ => record(
                    format,
                    poly.to_string(),
                    &[
                        ("function", json!("fr")),
                        ("r", json!(r)),
                        ("k", json!(k)),
                        ("polynomial", json!(poly.to_string())),
                        ("coefficients", json!(coeffs)),
                    ],
                ),
            }
        }
    };
    Ok(Outcome::ok(body))
}

fn cmd_verify(args: &cli::VerifyArgs, format: Format) -> Result<Outcome> {
    let rep = verify::run(args)?;
    let body = match format {
        Format::Text => rep.text(),
        Format::Json => pretty(&rep.json()),
        Format::Csv => rep.csv(),
    };
    Ok(Outcome {
        body,
        failed: !rep.ok(),
    })
}

fn scan_summary(rep: &SummatoryReport, omega: Option<f64>) -> String {
    let fmt_fit = |fit: &Option<gcdsum::analytic::MainTermFit>| match fit {
        Some(f) => f.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
        None => "unavailable".to_string(),
    };
    let leading = rep.free_fit.as_ref().map_or("unavailable".to_string(), |f| f.leading().to_string());
    let exponent = rep.residual_exponent.map_or("unavailable".to_string(), |e| e.to_string());
    let mut out = format!(
        "x_max: {}\nfinal sum: {}\neuler leading coefficient: {} (tail bound {})\nfree-fit leading coefficient: {leading}\n\
         fitted coefficients (ascending in log x, leading pinned): {}\nfree-fit coefficients: {}\nresidual exponent: {exponent}\n",
        rep.x_max,
        rep.checkpoints.last().map_or(0.0, |c| c.sum),
        rep.euler_leading.value,
        rep.euler_leading.tail_bound,
        fmt_fit(&rep.fitted_poly),
        fmt_fit(&rep.free_fit),
    );
    if let Some(b) = omega {
        out.push_str(&format!("omega reference b_r(x_max): {b}\n"));
    }
    if let Some(t) = rep.elapsed_secs {
        out.push_str(&format!("elapsed seconds: {t}\n"));
    }
    out
}

fn run_scan(selector: Selector, xmax: u64, out: &ScanOutputArgs, format: Format) -> Result<Outcome> {
    let opts = ScanOptions {
        checkpoint_count: out.checkpoints,
        threads: out.threads,
        ..ScanOptions::default()
    };
    let mut rep = summatory_scan_with(selector, xmax, &opts)?;
    if !out.timing {
        rep.elapsed_secs = None;
    }
    if let Some(path) = &out.csv {
        write_file(path, &rep.to_csv())?;
    }
    if let Some(path) = &out.json {
        write_file(path, &pretty(&rep))?;
    }
    let omega = match selector {
        Selector::GcdSum(r) if xmax >= 20 => Some(omega_bound(r, xmax as f64)?),
        _ => None,
    };
    let body = match format {
        Format::Text => scan_summary(&rep, omega),
        Format::Json => pretty(&rep),
        Format::Csv => rep.to_csv(),
    };
    Ok(Outcome::ok(body))
}

fn cmd_scan(cmd: &ScanCommand, format: Format) -> Result<Outcome> {
    match cmd {
        ScanCommand::A { r, xmax, out } => run_scan(Selector::GcdSum(*r), *xmax, out, format),
        ScanCommand::Tau { k, xmax, out } => run_scan(Selector::Piltz(*k), *xmax, out, format),
        ScanCommand::Extremal { r, x } => {
            let s = extremal_statistic(*r, *x)?;
            let text = format!(
                "r: {}\nx: {}\nomega(n_x): {}\nlog n_x: {}\nlog A_r(n_x): {}\nstatistic: {}\nlog(r+1): {}",
                s.r,
                s.x,
                s.omega_n_x,
                s.log_n_x,
                s.log_a_r,
                s.statistic,
                ((s.r + 1) as f64).ln()
            );
            let body = match format {
                Format::Json => pretty(&s),
                _ => record(
                    format,
                    text,
                    &[
                        ("r", json!(s.r)),
                        ("x", json!(s.x)),
                        ("omega_n_x", json!(s.omega_n_x)),
                        ("log_n_x", json!(s.log_n_x)),
                        ("log_a_r", json!(s.log_a_r)),
                        ("statistic", json!(s.statistic)),
                    ],
                ),
            };
            Ok(Outcome::ok(body))
        }
    }
}

fn cmd_igusa(args: &IgusaArgs, format: Format) -> Result<Outcome> {
    let method = match args.method {
        IgusaMethodArg::Hurwitz => IgusaMethod::Hurwitz,
        IgusaMethodArg::Direct => IgusaMethod::Direct,
    };
    let mut q = IgusaQuery::new(args.n, args.s.clone(), method);
    q.tolerance = args.tol;
    let v = igusa_evaluate(&q, args.trunc)?;
    let body = match format {
        Format::Csv => {
            let s: Vec<String> = v.s.iter().map(|x| x.to_string()).collect();
            let m = serde_json::to_value(v.method).expect("serializable");
            format!(
                "n,s,method,value,tail_bound,terms_evaluated\n{},{},{},{},{},{}\n",
                v.n,
                s.join(";"),
                m.as_str().unwrap_or_default(),
                v.value,
                v.tail_bound,
                v.terms_evaluated
            )
        }
        _ => pretty(&v),
    };
    Ok(Outcome::ok(body))
}

fn cmd_fr_table(args: &FrTableArgs, format: Format) -> Result<Outcome> {
    let reports = (1..=args.rmax)
        .map(|r| verify_fr_structure(r, args.kmax))
        .collect::<Result<Vec<_>>>()?;
    let body = match format {
        Format::Json => pretty(&reports),
        _ => {
            let mut out = String::from("r,k,i,c_i\n");
            for rep in &reports {
                for (r, k, i, c) in rep.csv_records() {
                    out.push_str(&format!("{r},{k},{i},{c}\n"));
                }
            }
            out
        }
    };
    Ok(Outcome::ok(body))
}

fn run(command: &Command, config: &RunConfig) -> Result<Outcome> {
    let format = config.format;
    let outcome = match command {
        Command::Eval(c) => cmd_eval(c, format)?,
        Command::Verify(a) => cmd_verify(a, format)?,
        Command::Scan(c) => cmd_scan(c, format)?,
        Command::Igusa(a) => cmd_igusa(a, format)?,
        Command::FrTable(a) => cmd_fr_table(a, format)?,
    };
    match &config.output {
        Some(path) => write_file(path, &outcome.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not worth a nonzero exit
            let _ = stdout.write_all(outcome.body.as_bytes());
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = RunConfig {
        format: cli.format,
        output: cli.output,
    };
    match run(&cli.command, &config) {
        Ok(o) if o.failed => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
