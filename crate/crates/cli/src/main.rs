//! `concprob`: batch front end for law suites, extrema, coupling scripts,
//! scheduler analyses and simulations. Every subcommand emits one report.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use concprob::Exec;

use crate::commands::{
    BiasArgs, CoupleArgs, ExtremaArgs, LawsArgs, MdpArgs, ParseArgs, SandwichArgs, SimulateArgs,
    SkipCostArgs,
};

#[derive(Debug, Parser)]
#[command(name = "concprob", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Run on one thread even when built with the `parallel` feature.
    #[arg(long, global = true)]
    sequential: bool,

    /// Size of the worker pool.
    #[arg(long, env = "CONCPROB_WORKERS", global = true)]
    workers: Option<usize>,

    /// Leave the wall-clock field out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run algebraic law suites on seeded random instances.
    Laws(LawsArgs),
    /// Exact expectation extrema of the monadic counter specifications.
    Extrema(ExtremaArgs),
    /// Check the couplings built by a derivation script.
    Couple(CoupleArgs),
    /// Scheduler-extremal expectations by backward induction.
    Mdp(MdpArgs),
    /// Monte-Carlo simulation under a fixed scheduler.
    Simulate(SimulateArgs),
    /// Compare the unbiased counter with its specification.
    Sandwich(SandwichArgs),
    /// Worst-case expected skip-list lookup cost against the closed-form bound.
    SkiplistCost(SkipCostArgs),
    /// Scheduler bias of the random-bits counter.
    CounterBias(BiasArgs),
    /// Parse and pretty-print program files.
    Parse(ParseArgs),
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use concprob::Error;
    match e.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Precondition(_) | Error::Parse { .. }) => 2,
        Some(_) => 1,
        // I/O and argument problems
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let start = Instant::now();
    let report = match &cli.command {
        Command::Laws(a) => commands::laws(a, exec),
        Command::Extrema(a) => commands::extrema(a),
        Command::Couple(a) => commands::couple(a),
        Command::Mdp(a) => commands::mdp(a, exec),
        Command::Simulate(a) => commands::simulate(a, exec),
        Command::Sandwich(a) => commands::sandwich(a, exec),
        Command::SkiplistCost(a) => commands::skiplist_cost(a, exec),
        Command::CounterBias(a) => commands::counter_bias(a, exec),
        Command::Parse(a) => commands::parse(a),
    };
    let mut report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if !cli.no_timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    let written = (|| -> anyhow::Result<()> {
        let mut out: Box<dyn Write> = match &cli.output {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        match cli.format {
            Format::Json => report.write_json(&mut out)?,
            Format::Csv => report.write_csv(&mut out)?,
        }
        out.flush()?;
        Ok(())
    })();
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {}: {}", c.name, c.detail);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
