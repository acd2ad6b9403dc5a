mod analysis;
mod context;
mod protocols;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qiplab::fixtures::catalog;

use analysis::{BatchCommand, GroverCommand, QdsCommand};
use context::{emit, CliResult, Context, Output};
use protocols::{QipCommand, TransformCommand};

/// Exact simulation of interactive proofs, their transforms and batch compilation.
#[derive(Parser, Debug)]
#[command(name = "qiplab", version)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", global = true)]
    tol: Vec<String>,
    /// Qubit cap for simulated registers.
    #[arg(long, global = true)]
    cap: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    #[command(subcommand)]
    Qip(QipCommand),
    #[command(subcommand)]
    Transform(TransformCommand),
    #[command(subcommand)]
    Qds(QdsCommand),
    #[command(subcommand)]
    Batch(BatchCommand),
    #[command(subcommand)]
    Grover(GroverCommand),
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Subcommand, Debug)]
enum FixturesCommand {
    /// Names, kinds and parameters of the built-in fixtures.
    List,
}

fn dispatch(cli: &Cli, ctx: &Context) -> CliResult<Output> {
    match &cli.command {
        Command::Qip(c) => protocols::qip(c, ctx),
        Command::Transform(c) => protocols::transform(c, ctx),
        Command::Qds(c) => analysis::qds(c, ctx),
        Command::Batch(c) => analysis::batch(c, ctx),
        Command::Grover(c) => analysis::grover(c, ctx),
        Command::Fixtures(FixturesCommand::List) => Ok(ctx.report("fixtures list", &())?.with_results(&catalog())?.into()),
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let ctx = Context::new(cli.seed, &cli.tol, cli.cap)?;
    let out = dispatch(cli, &ctx)?;
    let csv = match &cli.command {
        Command::Grover(GroverCommand::Curve { csv, .. }) => csv.as_ref(),
        _ => None,
    };
    emit(&out, cli.out.as_ref(), csv)?;
    for c in out.report.comparisons.iter().filter(|c| !c.holds) {
        eprintln!(
            "assertion failed: {} measured {} against {} (tolerance {})",
            c.quantity, c.measured, c.claimed, c.tolerance
        );
    }
    Ok(out.report.all_hold())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
