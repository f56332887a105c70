//! `drinfeld`: build torsion towers, run reciprocity campaigns and evaluate expressions.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drinfeld_core::reciprocity::Suite;
use drinfeld_core::Error;

use config::Overrides;

#[derive(Parser)]
#[command(name = "drinfeld", version, about = "Explicit reciprocity for Drinfeld modules over F_q((t))")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<u32>,
    #[arg(long, global = true)]
    s: Option<u32>,
    /// Module spec, e.g. `carlitz` or `custom(rho_t = "t + (1+t)*tau")`.
    #[arg(long, global = true)]
    module: Option<String>,
    #[arg(long, global = true)]
    m0: Option<u32>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Working precision in powers of t.
    #[arg(long, global = true)]
    prec: Option<i64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path (JSONL); standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// corollary, steinberg, functorial, chi-twist, uniqueness or all.
    #[arg(long, global = true)]
    suite: Option<Suite>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the torsion towers, logarithm and r_n and write them to the cache.
    Build,
    /// Run a verification suite and write one JSON record per check.
    Verify,
    /// Evaluate an expression in the torsion tower.
    Eval { expr: String },
    /// Remove cached towers.
    Clean,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = Overrides {
        p: cli.p,
        s: cli.s,
        module: cli.module.clone(),
        m0: cli.m0,
        n: cli.n,
        m: cli.m,
        prec: cli.prec,
        samples: cli.samples,
        seed: cli.seed,
        out: cli.out.clone(),
        suite: cli.suite,
    };
    let result = (|| {
        let file = match &cli.config {
            Some(path) => Overrides::read_file(path)?,
            None => Overrides::default(),
        };
        let cfg = flags.over(file).resolve()?;
        match &cli.command {
            Command::Build => commands::build(&cfg),
            Command::Verify => commands::verify(&cfg),
            Command::Eval { expr } => commands::eval(&cfg, expr),
            Command::Clean => commands::clean(),
        }
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Cache(_) | Error::Usage(_) => 2,
        Error::InsufficientPrecision { .. } => 3,
        _ => 1,
    }
}
