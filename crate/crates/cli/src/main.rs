use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use krivine_core::identities::verify_all_with;
use krivine_core::series::{OuterSumOptions, DEFAULT_MAX_TERMS};
use krivine_core::{Error, IdentityId, PrecisionContext};

mod constants;
mod render;
mod trace;

use constants::ConstantId;
use render::{Format, Record};
use trace::TraceTarget;

const EXIT_OK: u8 = 0;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_IDENTITY_FAILED: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "krivine")]
#[command(about = "High-precision constants and identity checks around the Grothendieck-Krivine constant")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Significant digits of the result
    #[arg(long, global = true, default_value_t = 20)]
    digits: u32,

    /// Cap on summed terms for series and traces
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_TERMS,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_terms: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Include wall-clock runtimes in the output
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a constant
    Compute { target: String },
    /// Verify one identity, or `all`
    Verify { target: String },
    /// List constants and identities
    List,
    /// Emit a convergence trace as CSV
    Trace { target: String },
}

struct Outcome {
    output: String,
    code: u8,
}

fn usage(message: String, valid: Vec<String>) -> Outcome {
    eprintln!("error: {message}");
    eprintln!("valid targets: {}", valid.join(", "));
    Outcome {
        output: String::new(),
        code: EXIT_USAGE,
    }
}

fn failure(err: &Error) -> Outcome {
    eprintln!("error: {err}");
    let code = match err {
        Error::InvalidPrecision(_) => EXIT_USAGE,
        _ => EXIT_NOT_CONVERGED,
    };
    Outcome {
        output: String::new(),
        code,
    }
}

fn compute(cli: &Cli, ctx: &PrecisionContext, target: &str) -> Outcome {
    let id: ConstantId = match target.parse() {
        Ok(id) => id,
        Err(msg) => return usage(msg, ConstantId::ALL.iter().map(|c| c.to_string()).collect()),
    };
    let started = Instant::now();
    let computed = match constants::compute(id, ctx) {
        Ok(c) => c,
        Err(e) => return failure(&e),
    };
    let runtime = cli.timing.then(|| started.elapsed().as_millis() as u64);
    let record = Record::from_constant(id, computed, ctx.digits(), runtime);
    let output = match cli.format {
        Format::Text => render::text_constant(&record),
        Format::Json => render::json_one(&record),
        Format::Csv => render::csv_records(std::slice::from_ref(&record)),
    };
    Outcome { output, code: EXIT_OK }
}

fn verify(cli: &Cli, ctx: &PrecisionContext, target: &str) -> Outcome {
    let all = target.eq_ignore_ascii_case("all");
    let ids = if all {
        IdentityId::all()
    } else {
        match target.parse::<IdentityId>() {
            Ok(id) => vec![id],
            Err(e) => {
                let mut valid: Vec<String> = IdentityId::all().iter().map(|i| i.to_string()).collect();
                valid.push("RECURRENCE(n)".into());
                valid.push("COEFF_VS_QUADRATURE(n)".into());
                valid.push("all".into());
                return usage(e.to_string(), valid);
            }
        }
    };
    let opts = OuterSumOptions::default().with_max_terms(cli.max_terms);
    let reports = verify_all_with(ctx, Some(&ids), &opts);
    let not_converged = reports
        .iter()
        .any(|r| r.params.get("error_kind").map(String::as_str) == Some("not_converged"));
    let failed = reports.iter().any(|r| !r.passed);
    let code = if not_converged {
        EXIT_NOT_CONVERGED
    } else if failed {
        EXIT_IDENTITY_FAILED
    } else {
        EXIT_OK
    };
    let records: Vec<Record> = reports
        .into_iter()
        .map(|r| Record::from_report(r, ctx.digits(), cli.timing))
        .collect();
    let output = match cli.format {
        Format::Text => render::text_reports(&records),
        Format::Json if all => render::json_many(&records),
        Format::Json => render::json_one(&records[0]),
        Format::Csv => render::csv_records(&records),
    };
    Outcome { output, code }
}

fn trace(cli: &Cli, ctx: &PrecisionContext, target: &str) -> Outcome {
    let target: TraceTarget = match target.parse() {
        Ok(t) => t,
        Err(msg) => return usage(msg, TraceTarget::ALL.iter().map(|t| t.to_string()).collect()),
    };
    let trace = match trace::run(target, ctx, cli.max_terms) {
        Ok(t) => t,
        Err(e) => return failure(&e),
    };
    let output = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&trace).expect("trace serializes");
            s.push('\n');
            s
        }
        Format::Text | Format::Csv => trace::to_csv(&trace),
    };
    if !trace.converged {
        eprintln!(
            "warning: {} not within tolerance after {} terms",
            trace.target, cli.max_terms
        );
    }
    let code = if trace.converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Outcome { output, code }
}

fn run(cli: &Cli) -> Outcome {
    if let Command::List = cli.command {
        return Outcome {
            output: render::list(cli.format),
            code: EXIT_OK,
        };
    }
    let ctx = match PrecisionContext::new(cli.digits) {
        Ok(c) => c,
        Err(e) => return failure(&e),
    };
    match &cli.command {
        Command::Compute { target } => compute(cli, &ctx, target),
        Command::Verify { target } => verify(cli, &ctx, target),
        Command::Trace { target } => trace(cli, &ctx, target),
        Command::List => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK),
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let outcome = run(&cli);
    let written = match &cli.out {
        Some(path) => fs::write(path, &outcome.output).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(outcome.output.as_bytes())
            .map_err(|e| ("stdout".to_string(), e)),
    };
    if let Err((dest, e)) = written {
        eprintln!("error: cannot write {dest}: {e}");
        return ExitCode::from(EXIT_NOT_CONVERGED);
    }
    ExitCode::from(outcome.code)
}
