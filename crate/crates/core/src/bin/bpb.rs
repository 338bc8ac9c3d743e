use std::path::PathBuf;
use std::process::ExitCode;

use bpb_core::bandit::Algorithm;
use bpb_core::cli::{load_config, run, Overrides, Subcommand};
use bpb_core::exit;
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Simulate,
    Offline,
    Curvature,
    DeffSweep,
}

/// Bandits over BP objectives: simulations, offline bound checks and
/// constant reports.
#[derive(Debug, Parser)]
#[command(name = "bpb", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment document; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds, overriding `seeds`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated algorithm names, overriding `algorithms`.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Option<Vec<Algorithm>>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("unknown algorithm `{s}`; expected one of {}", names.join(", "))
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::OK as u8 });
        }
    };
    if let Some(threads) = std::env::var("BPB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let cmd = match args.command {
        Command::Simulate => Subcommand::Simulate,
        Command::Offline => Subcommand::Offline,
        Command::Curvature => Subcommand::Curvature,
        Command::DeffSweep => Subcommand::DeffSweep,
    };
    let overrides = Overrides { out: args.out, seeds: args.seeds, algorithms: args.algorithms };
    let result = load_config(args.config.as_deref(), &overrides).and_then(|cfg| run(cmd, &cfg));
    match result {
        Ok(report) => {
            println!("{}", report.summary);
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
