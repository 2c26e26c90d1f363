use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use krein_cli::{emit_report, parse_config, run_pipeline_with_threads, Format, THREADS_ENV};

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// Realize an operator-valued power series in its Krein model space and
/// verify the realization over a sweep of truncation orders.
#[derive(Debug, Parser)]
#[command(name = "realize", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Output file; overrides the config's `output`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(format!("{THREADS_ENV}: {e}")),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {s:?}")),
        },
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid config {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = match run_pipeline_with_threads(&cfg, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: numerical failure {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let format = match args.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
    };
    let bytes = match emit_report(&report, format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let out = args.out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let written = match &out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::Write::write_all(&mut std::io::stdout().lock(), &bytes),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::FAILURE;
    }
    for rec in report.records.iter().filter(|r| !r.pass()) {
        for a in rec.assertions.iter().filter(|a| !a.pass) {
            eprintln!("N = {}: {} = {:e} exceeds {:e}", rec.n, a.name, a.value, a.tolerance);
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ASSERTION)
    }
}
