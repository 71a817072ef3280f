//! `soliton`: batch front-end for soliton-core.
//!
//! Structured results go to standard output (or `--out`), diagnostics to
//! standard error. Exit codes: 0 success, 1 verification failure, 2 invalid
//! input, 3 no convergence, 4 Reeb violation, 5 pipeline error.

mod commands;
mod error;
mod io;
mod pipeline;
mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::io::{error_record, Record};

#[derive(Parser, Debug)]
#[command(
    name = "soliton",
    version,
    about = "H-functional computations for toric germs"
)]
struct Cli {
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimize H over the Reeb cone and certify the soliton candidate.
    Minimize(commands::MinimizeArgs),
    /// CSV of H along a line through a base point.
    HCurve(commands::HCurveArgs),
    /// Discrete and limit DH distribution functions of a weight valuation.
    Dh(commands::DhArgs),
    /// Run a filtration pipeline.
    Filtration(pipeline::FiltrationArgs),
    /// Okounkov body, concave transform and volume function.
    Okounkov(commands::OkounkovArgs),
    /// Log canonical slope and local H of a monomial valuation.
    Slope(commands::SlopeArgs),
    /// Toric delta invariant at a reference vector.
    Delta(commands::DeltaArgs),
    /// Run a self-check suite.
    Verify(verify::VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Minimize(_) => "minimize",
            Command::HCurve(_) => "h-curve",
            Command::Dh(_) => "dh",
            Command::Filtration(_) => "filtration",
            Command::Okounkov(_) => "okounkov",
            Command::Slope(_) => "slope",
            Command::Delta(_) => "delta",
            Command::Verify(_) => "verify",
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Spec(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json(w: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("values serialize");
    writeln!(w, "{text}")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::Spec(format!("write: {e}")))
}

fn emit(out: &Option<PathBuf>, rec: &Record) -> Result<(), CliError> {
    write_json(sink(out)?.as_mut(), &rec.to_json())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Minimize(a) => emit(&cli.out, &commands::minimize(a)?),
        Command::HCurve(a) => {
            let mut buf = Vec::new();
            commands::h_curve(a, &mut buf)?;
            sink(&cli.out)?
                .write_all(&buf)
                .map_err(|e| CliError::Spec(format!("write: {e}")))
        }
        Command::Dh(a) => {
            let mut buf = Vec::new();
            let rec = commands::dh(a, &mut buf)?;
            sink(&cli.out)?
                .write_all(&buf)
                .map_err(|e| CliError::Spec(format!("write: {e}")))?;
            match &a.atoms {
                Some(path) => emit(&Some(path.clone()), &rec),
                None => Ok(()),
            }
        }
        Command::Filtration(a) => emit(&cli.out, &pipeline::filtration(a)?),
        Command::Okounkov(a) => emit(&cli.out, &commands::okounkov(a)?),
        Command::Slope(a) => emit(&cli.out, &commands::slope(a)?),
        Command::Delta(a) => emit(&cli.out, &commands::delta(a)?),
        Command::Verify(a) => {
            let (rec, pass) = verify::verify(a)?;
            emit(&cli.out, &rec)?;
            if pass {
                Ok(())
            } else {
                Err(CliError::Failed(format!(
                    "suite {} has failing properties",
                    a.suite.name()
                )))
            }
        }
    }
}

fn configure_threads() {
    let Ok(s) = std::env::var("SOLITON_THREADS") else {
        return;
    };
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("soliton: SOLITON_THREADS ignored: {e}");
            }
        }
        _ => eprintln!("soliton: SOLITON_THREADS={s:?} is not a positive integer; ignored"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("soliton {}: {e}", cli.command.name());
            if !matches!(e, CliError::Failed(_)) {
                let _ = write_json(
                    &mut std::io::stdout().lock(),
                    &error_record(cli.command.name(), &e),
                );
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
