use std::path::PathBuf;
use std::process::ExitCode;

use cbf_core::run::{exit, exit_code, run, run_report, Command, LoadedConfig, RunOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Brinkman-Forchheimer attractor laboratory.
#[derive(Parser, Debug)]
#[command(name = "cbf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate the Grashof condition for a singleton attractor.
    CheckConditions(Common),
    /// Integrate the deterministic system and log energy quantities.
    Simulate(Common),
    /// Search for the singleton attractor with several probes.
    Singleton(Common),
    /// Pullback samples of the random attractor, one per seed.
    Pullback(Common),
    /// Distance sweep over epsilon and seeds, with the rate fit.
    Sweep(Common),
    /// Ornstein-Uhlenbeck moment and averaging statistics.
    OuDiagnostics(Common),
    /// Summarize result JSON in a directory, optionally with SVG plots.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config or a manifest JSON from an earlier run.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed_offset: Option<u64>,
    /// May be repeated; replaces output.formats.
    #[arg(long, value_enum)]
    format: Vec<Format>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Directory holding result JSON.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Vec<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn name(self) -> String {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
        .into()
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CBF_LOG", "warn")).init();
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::CheckConditions(c) => (Command::CheckConditions, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Singleton(c) => (Command::Singleton, c),
        Cmd::Pullback(c) => (Command::Pullback, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::OuDiagnostics(c) => (Command::OuDiagnostics, c),
        Cmd::Report(r) => {
            let formats: Vec<String> = r.format.iter().map(|f| f.name()).collect();
            return finish(run_report(&r.out, &formats));
        }
    };
    let loaded = match LoadedConfig::load(&common.config) {
        Ok(l) => l,
        Err(e) => return fail(&e),
    };
    let opts = RunOptions {
        out: common.out,
        workers: common.workers,
        seed_offset: common.seed_offset,
        formats: common.format.iter().map(|f| f.name()).collect(),
    };
    finish(run(command, &loaded, &opts))
}

fn finish(res: cbf_core::Result<cbf_core::run::RunOutcome>) -> ExitCode {
    match res {
        Ok(outcome) => {
            println!("{}", outcome.summary.trim_end());
            log::info!(
                "{} artifacts in {}",
                outcome.artifacts.len(),
                outcome.out_dir.display()
            );
            ExitCode::from(outcome.status.exit_code() as u8)
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &cbf_core::Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = exit_code(e);
    debug_assert!(code != exit::OK);
    ExitCode::from(code as u8)
}
