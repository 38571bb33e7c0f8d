use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seni_cli::{run, Command, Format, RunConfig};

/// Checker and explorer for transition-system programs.
#[derive(Parser)]
#[command(name = "seni", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Entry `.seni` file.
    file: PathBuf,

    /// Entry system (default: the sole system with a Main spec in the file).
    #[arg(long)]
    system: Option<String>,

    /// Comma-separated init arguments for the entry system.
    #[arg(long, value_delimiter = ',')]
    args: Vec<String>,

    /// Maximum number of configurations to explore.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,

    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Additional module search path (repeatable). The entry file's
    /// directory is always searched.
    #[arg(long = "path")]
    paths: Vec<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and type-check only.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Explore the state space and print it as DOT.
    Graph {
        #[command(flatten)]
        common: Common,
    },
    /// Check every static property of the entry system.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Find a reachable state satisfying a propositional formula.
    Sat {
        #[command(flatten)]
        common: Common,
        /// Formula over prop names, e.g. 'AllWaiting & !Done'.
        formula: String,
    },
    /// Check the simulation preorder between two systems.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Name of the abstract (simulating) system.
        abstract_name: String,
        /// Name of the refined (simulated) system.
        refined_name: String,
    },
    /// Print a seeded pseudo-random execution.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Number of steps to take.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Random seed; equal seeds replay equal traces.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn to_config(common: Common, command: Command) -> RunConfig {
    RunConfig {
        command,
        entry_file: common.file,
        system: common.system,
        args: common.args,
        max_states: common.max_states as usize,
        format: match common.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        },
        search_paths: common.paths,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Cmd::Check { common } => to_config(common, Command::Check),
        Cmd::Graph { common } => to_config(common, Command::Graph),
        Cmd::Verify { common } => to_config(common, Command::Verify),
        Cmd::Sat { common, formula } => to_config(common, Command::Sat { formula }),
        Cmd::Refine {
            common,
            abstract_name,
            refined_name,
        } => to_config(
            common,
            Command::Refine {
                abstract_name,
                refined_name,
            },
        ),
        Cmd::Trace {
            common,
            steps,
            seed,
        } => to_config(common, Command::Trace { steps, seed }),
    };
    let result = run(&cfg);
    print!("{}", result.output);
    ExitCode::from(result.exit.clamp(0, 255) as u8)
}
