use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twodisk_experiments::{parse_config, run, Command};

#[derive(Parser)]
#[command(name = "twodisk", version, about = "Two-disk boundary-integral experiments")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Paths {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve once per (M, eps) and write boundary data.
    Solve(Paths),
    /// Flux error of both methods against the series reference over eps.
    SweepEps(Paths),
    /// Flux error of both methods over the node count at fixed eps.
    SweepGrid(Paths),
    /// Singular values and condition numbers over eps.
    Condition(Paths),
    /// Right-hand side and residual projections onto small singular vectors.
    Projections(Paths),
    /// Field samples and level curves.
    Levels(Paths),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let (command, paths) = match cli.command {
        Sub::Solve(p) => (Command::Solve, p),
        Sub::SweepEps(p) => (Command::SweepEps, p),
        Sub::SweepGrid(p) => (Command::SweepGrid, p),
        Sub::Condition(p) => (Command::Condition, p),
        Sub::Projections(p) => (Command::Projections, p),
        Sub::Levels(p) => (Command::Levels, p),
    };
    let text = match std::fs::read_to_string(&paths.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", paths.config.display());
            return ExitCode::from(2);
        }
    };
    let output = match parse_config(&text).and_then(|cfg| run(command, &cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}: {e}", paths.config.display());
            return ExitCode::from(2);
        }
    };
    if let Err(e) = output.write_to(&paths.out) {
        eprintln!("error: writing {}: {e}", paths.out.display());
        return ExitCode::from(2);
    }
    for w in &output.record.warnings {
        eprintln!("warning: {w}");
    }
    for f in &output.record.failures {
        eprintln!("failed: eps = {}, M = {}: {}", f.eps, f.m, f.message);
    }
    let names: Vec<&str> = output.artifacts.iter().map(|a| a.name).collect();
    println!(
        "{}: {} entries in {:.2} s, wrote {} and record.json to {}",
        command.name(),
        output.record.entries.len(),
        output.record.seconds,
        names.join(", "),
        paths.out.display()
    );
    if output.record.succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
