use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use emc_sim::commands;
use emc_sim::config::{presets, Scenario};

/// EMC speed-loop simulator with asynchronous sampling.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Simulate(Common),
    /// Run EMC and PI on the same traces.
    Benchmark(Common),
    /// Unit-circle sweep of the scheduled eigenvalues.
    Stability(Common),
    /// Critical-timing family over several upper sampling bounds.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated upper bounds (s); defaults to [sweep] ts_max.
        #[arg(long, value_delimiter = ',')]
        ts_max: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file, or `preset:<distrej|critical|benchmark>`.
    config: String,
    /// Overrides [timing] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

fn load(c: &Common) -> anyhow::Result<Scenario> {
    let mut sc = match c.config.strip_prefix("preset:") {
        Some(name) => match presets::by_name(name) {
            Some(text) => Scenario::parse(text)?,
            None => bail!("unknown preset {name:?} (distrej, critical, benchmark)"),
        },
        None => {
            Scenario::load(c.config.as_ref()).with_context(|| format!("loading {}", c.config))?
        }
    };
    if let Some(seed) = c.seed {
        sc.timing.seed = seed;
    }
    let Format::Csv = c.format;
    Ok(sc)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let written = match &cli.command {
        Command::Simulate(c) => commands::simulate(&load(c)?, &c.out_dir)?,
        Command::Benchmark(c) => commands::benchmark(&load(c)?, &c.out_dir)?,
        Command::Stability(c) => commands::stability(&load(c)?, &c.out_dir)?,
        Command::Sweep { common, ts_max } => {
            commands::sweep(&load(common)?, ts_max, &common.out_dir)?
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
