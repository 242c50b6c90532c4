use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use levy_va_cli::{run, Command, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "levy-va", about = "Variable annuity pricing under a NIG hybrid model")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Price GMAB, DB and SB by Fourier integration.
    Price(Common),
    /// Price over the [sweep] grid.
    Sweep(Common),
    /// Quadrature against Monte Carlo for every integral.
    Benchmark(Common),
    /// Fourier prices against path simulation, with the truncation bounds.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

fn workers() -> Result<()> {
    if let Ok(v) = std::env::var("VA_WORKERS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("VA_WORKERS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn main_inner() -> Result<()> {
    let cli = Cli::parse();
    workers()?;
    let (cmd, common) = match cli.command {
        Cmd::Price(c) => (Command::Price, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::Benchmark(c) => (Command::Benchmark, c),
        Cmd::Oracle(c) => (Command::Oracle, c),
    };
    let (mut cfg, text) = RunConfig::load(&common.config)?;
    let overrides = Overrides {
        seed: common.seed,
        batches: common.batches,
        samples: common.samples,
    };
    overrides.apply(&mut cfg);
    let base = common.config.parent().map(|p| p.to_path_buf());
    let table = run(cmd, &cfg, Some(&text), base.as_deref())?;
    table.write(&common.out)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
