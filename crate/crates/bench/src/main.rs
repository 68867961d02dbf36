use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdp_bench::commands;
use gdp_bench::config::{Mode, Overrides};
use gdp_bench::error::{BenchError, Result};

#[derive(Parser)]
#[command(name = "gdp", version, about = "Graphical Dirichlet process clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the published iteration schedules.
    #[arg(long, global = true)]
    paper_scale: bool,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario into per-group CSV files.
    Simulate,
    /// Fit one method to a dataset and write chain files.
    Fit {
        /// Dataset directory; defaults to the config's `dataset`, or a fresh
        /// simulation of its scenario.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Point estimate, co-clustering matrix and plots from chain files.
    Summarize {
        /// Directory holding `chain_*.ndjson`.
        #[arg(long)]
        chains: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Replicated GDP, HDP-fork and k-means comparison.
    Compare,
    /// Score a partition CSV against a dataset.
    Metrics {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        partition: PathBuf,
    },
}

fn required(value: Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    value.ok_or_else(|| BenchError::Config(format!("--{flag} is required")))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let overrides = Overrides {
        seed: g.seed,
        paper_scale: g.paper_scale,
        mode: g.mode,
    };
    let pool = gdp_bench::worker_pool()?;
    pool.install(|| match cli.command {
        Command::Simulate => {
            commands::cmd_simulate(&required(g.config, "config")?, &required(g.out, "out")?, &overrides)
        }
        Command::Fit { data } => commands::cmd_fit(
            &required(g.config, "config")?,
            data.as_deref(),
            &required(g.out, "out")?,
            &overrides,
        ),
        Command::Summarize { chains, data } => {
            let out = g.out.unwrap_or_else(|| chains.clone());
            print_json(&commands::cmd_summarize(&chains, data.as_deref(), &out)?);
            Ok(())
        }
        Command::Compare => {
            let report = commands::cmd_compare(&required(g.config, "config")?, &required(g.out, "out")?, &overrides)?;
            print_json(&report.summary);
            Ok(())
        }
        Command::Metrics { data, partition } => {
            print_json(&commands::cmd_metrics(&data, &partition, g.out.as_deref())?);
            Ok(())
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("serializable"));
            ExitCode::from(2)
        }
    }
}
