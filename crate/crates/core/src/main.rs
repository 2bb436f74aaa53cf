use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use extlab::experiments::sweep::render_summary;
use extlab::experiments::worked::{render_checks, DEFAULT_ALPHAS};
use extlab::experiments::{cmd_example1, cmd_example2, cmd_selftest, cmd_sweep, SweepConfig, SweepOverrides};
use extlab::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "extlab", version, about = "Self-adjoint extension calculus on exactly solvable models")]
struct Cli {
    /// Print the JSON summary on stdout instead of the text report.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep eps and record boundary-map errors, gaps and limits.
    Sweep {
        #[arg(long)]
        model: Option<String>,
        /// friedrichs | salpha:<alpha>
        #[arg(long)]
        extension: Option<String>,
        /// start:stop:count (geometric)
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON summary path (default: next to --out)
        #[arg(long)]
        summary: Option<PathBuf>,
        /// TOML file with defaults; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Friedrichs extension on the half-line.
    Example1,
    /// The S_alpha family on two half-lines.
    Example2 {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
    },
    /// Oracle suites.
    Selftest,
}

fn emit<T: Serialize>(json: bool, report: &T, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
    } else {
        print!("{}", text());
    }
}

fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let json = cli.json;
    match cli.command {
        Command::Sweep { model, extension, eps, probes, seed, out, summary, config } => {
            let file = config.as_deref().map(SweepOverrides::from_file).transpose()?;
            if out.is_none() && file.as_ref().and_then(|f| f.out.as_ref()).is_none() {
                return Err(Error::Config("--out is required (or `out` in the config file)".into()));
            }
            let cli = SweepOverrides { model, extension, eps, probes, seed, out, summary, ..Default::default() };
            let cfg = SweepConfig::resolve(file, cli)?;
            let report = cmd_sweep(&cfg)?;
            emit(json, &report, || render_summary(&report));
            Ok(verdict(report.pass))
        }
        Command::Example1 => {
            let r = cmd_example1()?;
            emit(json, &r, || render_checks("example 1: Friedrichs extension on the half-line", &r.checks, r.pass));
            Ok(verdict(r.pass))
        }
        Command::Example2 { alpha } => {
            let alphas = if alpha.is_empty() { DEFAULT_ALPHAS.to_vec() } else { alpha };
            if alphas.iter().any(|a| !a.is_finite()) {
                return Err(Error::Config("alpha values must be finite".into()));
            }
            let r = cmd_example2(&alphas)?;
            emit(json, &r, || render_checks("example 2: S_alpha on two half-lines", &r.checks, r.pass));
            Ok(verdict(r.pass))
        }
        Command::Selftest => {
            let r = cmd_selftest()?;
            emit(json, &r, || render_checks("selftest", &r.checks, r.pass));
            Ok(verdict(r.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { EXIT_CONFIG } else { EXIT_FAILURE })
        }
    }
}
