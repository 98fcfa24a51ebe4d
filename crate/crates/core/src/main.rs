use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpdual::experiments::{load_config, run, Command, RunError, RunOptions};
use cpdual::prob::ArithPolicy;

#[derive(Parser)]
#[command(
    name = "cpdual",
    version,
    about = "Covering-packing duality experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the duality identity exactly over the configured grid.
    Duality(Common),
    /// Tabulate A, beta and the rate exponent against block length.
    Exponent(Common),
    /// Simulate random source codes (covering).
    Cover(Common),
    /// Simulate random channel codes (packing) and check the lower bound.
    Pack(Common),
    /// Run the source-channel separation demo.
    Separation(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `run.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Arithmetic policy; overrides `run.arith`.
    #[arg(long, value_parser = parse_arith)]
    arith: Option<ArithPolicy>,
}

fn parse_arith(s: &str) -> Result<ArithPolicy, String> {
    s.parse().map_err(|e: cpdual::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Duality(c) => (Command::Duality, c),
        Sub::Exponent(c) => (Command::Exponent, c),
        Sub::Cover(c) => (Command::Cover, c),
        Sub::Pack(c) => (Command::Pack, c),
        Sub::Separation(c) => (Command::Separation, c),
    };
    match execute(command, common) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cpdual: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command, common: Common) -> Result<u8, RunError> {
    if let Some(threads) = common.threads {
        if threads == 0 {
            return Err(RunError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    }
    let (cfg, text) = load_config(&common.config)?;
    let opts = RunOptions {
        seed: common.seed,
        out: common.out,
        arith: common.arith,
        threads: common.threads,
    };
    let report = run(command, &cfg, &text, &opts)?;
    for v in &report.manifest.violations {
        eprintln!("cpdual: invariant violation: {v}");
    }
    eprintln!(
        "cpdual: wrote {} files to {}",
        report.manifest.outputs.len(),
        report.out_dir.display()
    );
    Ok(report.exit_code() as u8)
}
