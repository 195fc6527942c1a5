use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use fockop::commands::{self, CliError, Cmd, Overrides};
use fockop::verify::{self, Suite};
use fockop_core::wco::Verdict;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Classify,
    Bounds,
    Essnorm,
    Verify,
    Oracle,
}

/// Weighted composition operators between Fock spaces.
#[derive(Parser, Debug)]
#[command(name = "fockop", version)]
struct Args {
    command: Command,
    /// Problem file, or a directory of `*.json` problem files.
    path: PathBuf,
    /// Gauss-Hermite nodes per real axis.
    #[arg(long)]
    quad_nodes: Option<usize>,
    /// Seed for random directions and Monte Carlo.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON output (default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Plain-text output.
    #[arg(long)]
    text: bool,
    /// Exit with 3 when a problem is unbounded.
    #[arg(long)]
    exit_verdict: bool,
    /// Property suite for `verify`.
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
}

fn configure_threads() {
    if let Some(k) = std::env::var("FOCKOP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&k| k > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(format!("cannot encode report: {e}")))
}

fn run(args: &Args) -> Result<u8, CliError> {
    let overrides = Overrides { quad_nodes: args.quad_nodes, seed: args.seed };
    let cmd = match args.command {
        Command::Verify => {
            let r = verify::verify(&args.path, args.suite, &overrides)?;
            emit(&if args.text { verify::render_text(&r) } else { to_json(&r)? });
            return Ok(if r.failed > 0 { 1 } else { 0 });
        }
        Command::Classify => Cmd::Classify,
        Command::Bounds => Cmd::Bounds,
        Command::Essnorm => Cmd::Essnorm,
        Command::Oracle => Cmd::Oracle,
    };
    let single = !args.path.is_dir();
    let reports = commands::run_path(cmd, &args.path, &overrides)?;
    let text = if args.text {
        reports.iter().map(commands::render_text).collect::<Vec<_>>().join("\n\n")
    } else if single {
        to_json(&reports[0])?
    } else {
        to_json(&reports)?
    };
    emit(&text);
    let unbounded = reports.iter().any(|r| r.classification.verdict == Verdict::Unbounded);
    Ok(if args.exit_verdict && unbounded { 3 } else { 0 })
}

fn main() -> ExitCode {
    let args = Args::parse();
    configure_threads();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fockop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
