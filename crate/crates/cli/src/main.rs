use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use igt_core::experiments::{run_command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// synthetic two-community sweep over the feature spread
    Synth,
    /// IGT + linear / MLP heads on a dataset across split modes
    Bench,
    /// (N, J) grid of validation accuracy with a linear head
    Ablate,
    /// accuracy drop when the isometries are left random
    RandomW,
    /// empirical check of the stability and concentration bounds
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Synth => "synth",
            Self::Bench => "bench",
            Self::Ablate => "ablate",
            Self::RandomW => "random-w",
            Self::Verify => "verify",
        }
    }
}

/// Interferometric graph transform workbench.
#[derive(Debug, Parser)]
#[command(name = "igt-lab", version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// plain-text `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// global seed, overriding the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// output directory (default results/<command>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// shorthand for the `trials=N` override of `verify`
    #[arg(long)]
    trials: Option<usize>,
    /// `key=value` overrides applied after the configuration file
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut overrides = cli.overrides;
    if let Some(t) = cli.trials {
        overrides.push(format!("trials={t}"));
    }
    let result = RunConfig::new(cli.command.name(), cli.config.as_deref(), &overrides, cli.seed, cli.out.as_deref())
        .and_then(|config| run_command(&config));
    match result {
        Ok(output) => {
            println!("{}", output.summary);
            for f in &output.files {
                println!("  wrote {}", f.display());
            }
            if output.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("igt-lab: {e}");
            ExitCode::from(2)
        }
    }
}
