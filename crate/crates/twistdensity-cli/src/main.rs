//! `twistdensity`: family densities, predictions, comparisons, zeros and the
//! check suite for quadratic twists of one elliptic curve.

mod commands;
mod config;
mod emit;
mod error;
mod verify;

use clap::{Parser, Subcommand};
use commands::{Context, Outcome};
use config::{Format, Overrides};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "twistdensity", version, about = "One-level density of low-lying zeros for quadratic twists of an elliptic curve")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file; the built-in defaults use the conductor-11 curve.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Support of φ̂, overriding the file.
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Family scale; repeat for several.
    #[arg(long = "X", global = true)]
    x: Vec<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Family average of the explicit formula at each X.
    Density,
    /// Main terms and the Ratios prediction at each X.
    Predict,
    /// Density against prediction, with the odd-term decay fit and the exponent curves.
    Compare,
    /// Low zeros of the configured twists.
    Zeros,
    /// Character-sum and transform checks.
    Verify,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let overrides = Overrides { xs: cli.x, sigma: cli.sigma, workers: cli.workers, out_dir: cli.out, format: cli.format };
    let cfg = config::load(cli.config.as_deref(), &overrides)?;
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Emit(e.to_string()))?;
    }
    let ctx = Context::new(cfg)?;
    let outcome: Outcome = match cli.command {
        Command::Density => commands::density(&ctx)?,
        Command::Predict => commands::predict(&ctx)?,
        Command::Compare => commands::compare(&ctx)?,
        Command::Zeros => commands::zeros(&ctx)?,
        Command::Verify => verify::verify(&ctx)?,
    };
    let (dir, format) = (&ctx.cfg.out_dir, ctx.cfg.format);
    for a in &outcome.artifacts {
        if let Some(t) = a.csv.as_ref().filter(|_| format.csv() || a.json.is_none()) {
            emit::write_file(dir, &format!("{}.csv", a.stem), &t.to_csv()?)?;
        }
        if let Some(j) = a.json.as_ref().filter(|_| format.json()) {
            emit::write_file(dir, &format!("{}.json", a.stem), j)?;
        }
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(!matches!(cli.command, Command::Verify) || outcome.summary.iter().all(|l| l.starts_with("PASS")))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
