//! `privpost`: run privacy-aware posterior samplers, summarize draws and
//! explore noise mechanisms from the command line.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod mech;
mod oracle;
mod output;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Example, Overrides, RunConfig};
use error::{CliError, CliResult};
use mech::{MechParams, Mechanism};
use oracle::OracleArgs;
use run::RunFlags;

#[derive(Debug, Parser)]
#[command(name = "privpost", version, about = "Exact posterior sampling from differentially private releases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a sampler from a JSON config, or one of the built-in examples.
    #[command(args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
    Run(RunArgs),
    /// Summarize a draws CSV.
    Summarize {
        draws: PathBuf,
        /// Also write the summary as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Explore a noise mechanism.
    #[command(subcommand)]
    Mech(MechCommand),
    /// Exact grid posterior for a small table instance.
    Oracle(OracleArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long, required = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    niter: Option<usize>,
    #[arg(long, global = true)]
    warmup: Option<usize>,
    #[arg(long, global = true)]
    chains: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report per-chain iteration counts on standard error every second.
    #[arg(long, global = true)]
    progress: bool,
    #[command(subcommand)]
    example: Option<RunExample>,
}

#[derive(Debug, Subcommand)]
enum RunExample {
    /// Run a built-in example; outputs go to a directory named after it.
    Example {
        #[arg(value_enum)]
        id: Example,
        /// Use the published noisy table instead of simulated data. The
        /// dgauss-table example always uses its published counts.
        #[arg(long)]
        published_table: bool,
        /// Print the example's config instead of running it.
        #[arg(long)]
        dump_config: bool,
    },
}

#[derive(Debug, Subcommand)]
enum MechCommand {
    /// Print `x,pmf` rows covering all but `--tail` of the mass.
    Pmf {
        #[arg(value_enum)]
        mechanism: Mechanism,
        #[command(flatten)]
        params: MechParams,
        #[arg(long, default_value_t = 1e-12)]
        tail: f64,
    },
    /// Print `count` draws.
    Sample {
        #[arg(value_enum)]
        mechanism: Mechanism,
        #[command(flatten)]
        params: MechParams,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn run_command(args: RunArgs) -> CliResult<()> {
    let overrides = Overrides {
        niter: args.niter,
        warmup: args.warmup,
        chains: args.chains,
        seed: args.seed,
        output_dir: args.output_dir,
    };
    let mut config = match (&args.example, &args.config) {
        (Some(RunExample::Example { id, published_table, .. }), _) => id.config(*published_table)?,
        (None, Some(path)) => RunConfig::load(path)?,
        (None, None) => return Err(CliError::config("--config", "a config file or `example <id>` is required")),
    };
    config.apply(&overrides);
    if let Some(RunExample::Example { dump_config: true, .. }) = args.example {
        let text = serde_json::to_string_pretty(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
        return emit(&format!("{text}\n"));
    }
    let flags = RunFlags {
        threads: args.threads,
        progress: args.progress,
    };
    emit(&run::run(&config, flags)?)
}

fn summarize_command(draws: &Path, output: Option<&Path>) -> CliResult<()> {
    let matrix = output::read_draws(draws)?;
    let rows = privpost::diagnostics::summarize(&matrix).map_err(|e| CliError::Runtime(format!("summary: {e}")))?;
    if let Some(path) = output {
        output::write_summary(path, &rows)?;
    }
    emit(&output::summary_table(&rows))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Summarize { draws, output } => summarize_command(&draws, output.as_deref()),
        Command::Mech(MechCommand::Pmf { mechanism, params, tail }) => emit(&mech::pmf(mechanism, &params, tail)?),
        Command::Mech(MechCommand::Sample {
            mechanism,
            params,
            count,
            seed,
        }) => emit(&mech::sample(mechanism, &params, count, seed)?),
        Command::Oracle(args) => emit(&oracle::oracle(&args)?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
