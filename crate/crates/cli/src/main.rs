//! `qwitness`: witness-set compression and randomness classification for
//! integer sequences.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{OutputFormat, QuestionKind, RunConfig, CAP_ENV};
use error::CliError;

#[derive(Parser)]
#[command(name = "qwitness", version, about = "Witness-set compression and randomness classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: bitstring, witnesses, covers, quantum checks, classification.
    Analyze(CommonArgs),
    /// Witness relation and cover solutions only.
    Witness(CommonArgs),
    /// Grover trace and counting estimate for an oracle.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Integers A..=B.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    range: Option<Vec<u64>>,
    /// Explicit comma-separated values.
    #[arg(long, value_delimiter = ',', value_name = "V1,V2,...")]
    list: Option<Vec<u64>>,
    /// The first N squarefree integers.
    #[arg(long, value_name = "N")]
    squarefree: Option<u64>,
    #[arg(long, value_enum)]
    question: Option<QuestionKind>,
    /// Recurrence multiplier.
    #[arg(long)]
    p: Option<u64>,
    /// Recurrence offset.
    #[arg(long)]
    q: Option<u64>,
    /// Targets for --question identity (default: the whole sequence).
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<u64>>,
    /// Qubit budget [default: 24]; QWITNESS_QUBIT_CAP lowers it further.
    #[arg(long)]
    qubit_cap: Option<u32>,
    /// Phase-estimation qubits for counting [default: 6].
    #[arg(long)]
    phase_bits: Option<u32>,
    /// Largest residual instance solved exactly [default: 24].
    #[arg(long)]
    exact_threshold: Option<usize>,
    /// Output file [default: stdout]; with --format both, CSV goes next to it.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Skip state-vector simulation.
    #[arg(long)]
    no_quantum: bool,
    /// Worker threads for independent pipeline stages.
    #[arg(long, value_name = "K")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Synthetic oracle with N support points...
    #[arg(long, value_name = "N")]
    support: Option<u64>,
    /// ...of which the first M are marked.
    #[arg(long, value_name = "M")]
    marked: Option<u64>,
    /// Grover rounds to trace [default: optimal].
    #[arg(long, value_name = "K")]
    iterations: Option<u64>,
    /// Include the final state's nonzero amplitudes.
    #[arg(long)]
    dump_state: bool,
}

impl CommonArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let flags = RunConfig {
            range: self.range.map(|r| (r[0], r[1])),
            list: self.list,
            squarefree: self.squarefree,
            question: self.question,
            p: self.p,
            q: self.q,
            targets: self.targets,
            qubit_cap: self.qubit_cap,
            phase_bits: self.phase_bits,
            exact_threshold: self.exact_threshold,
            out: self.out,
            format: self.format,
            quantum: self.no_quantum.then_some(false),
            jobs: self.jobs,
            ..Default::default()
        };
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.merged_with(flags))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let env_cap = config::env_cap(std::env::var(CAP_ENV).ok())?;
    match cli.command {
        Command::Analyze(args) => commands::analyze_cmd(&args.into_config()?, env_cap),
        Command::Witness(args) => commands::witness_cmd(&args.into_config()?, env_cap),
        Command::Simulate(args) => {
            let extra = RunConfig {
                support: args.support,
                marked: args.marked,
                iterations: args.iterations,
                dump_state: args.dump_state.then_some(true),
                ..Default::default()
            };
            let config = args.common.into_config()?.merged_with(extra);
            commands::simulate_cmd(&config, env_cap)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwitness: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
