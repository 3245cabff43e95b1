use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Test-driven program repair for MiniLang.
#[derive(Parser, Debug)]
#[command(name = "repairforge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a test suite and print per-test verdicts.
    Run {
        program: PathBuf,
        tests: PathBuf,
        /// Run the held-out tests instead of the guiding ones.
        #[arg(long)]
        held_out_only: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Rank statements by suspiciousness.
    Localize {
        program: PathBuf,
        tests: PathBuf,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        top_k: u64,
        /// Use the Tarantula formula instead of Ochiai.
        #[arg(long)]
        tarantula: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Build the repair constraint for one line and print it as JSON.
    Constraint {
        program: PathBuf,
        tests: PathBuf,
        #[arg(long)]
        line: u32,
        #[command(flatten)]
        bounds: Bounds,
        #[command(flatten)]
        out: Output,
    },
    /// Synthesize the smallest expression satisfying a constraint file.
    Synth {
        constraint: PathBuf,
        #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u64).range(1..))]
        max_size: u64,
        #[command(flatten)]
        components: Components,
        #[command(flatten)]
        out: Output,
    },
    /// Repair a program and print the diff.
    Repair {
        program: PathBuf,
        tests: PathBuf,
        #[command(flatten)]
        search: Search,
        /// Write the repaired program to this path.
        #[arg(long)]
        write: Option<PathBuf>,
        /// Write the patch in interchange format to this path.
        #[arg(long)]
        patch_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Generate amplified tests that distinguish the program from its repair.
    Evidence {
        program: PathBuf,
        tests: PathBuf,
        /// Patch to assess; without it the program is repaired first.
        #[arg(long)]
        patch: Option<PathBuf>,
        /// Reference implementation used as the oracle.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = repairforge::evidence::DEFAULT_SEED)]
        seed: u64,
        /// Number of probe inputs.
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        /// Write the base suite plus oracled amplified tests to this path.
        #[arg(long)]
        suite_out: Option<PathBuf>,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: Output,
    },
    /// Check a patch against the held-out tests.
    OverfitCheck {
        program: PathBuf,
        tests: PathBuf,
        #[arg(long)]
        patch: PathBuf,
        /// Print only the held-out table.
        #[arg(long)]
        held_out_only: bool,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Write the JSON report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Bounds {
    /// Dynamic evaluations of the unknown allowed per replay.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    max_evals: u64,
    /// Passing paths recorded per test.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_paths: u64,
}

#[derive(Args, Debug, Clone)]
struct Components {
    /// Draw constants from -10..=10 instead of the program's literals.
    #[arg(long)]
    unrestricted_constants: bool,
    /// Allow `/` and `%`.
    #[arg(long)]
    include_div: bool,
    /// Allow every operator, not only those of the replaced expression.
    #[arg(long)]
    all_operators: bool,
}

#[derive(Args, Debug, Clone)]
struct Search {
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    top_k: u64,
    #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u64).range(1..))]
    max_size: u64,
    /// Overall wall-clock budget in seconds.
    #[arg(long, default_value_t = 120, value_parser = clap::value_parser!(u64).range(1..))]
    budget_secs: u64,
    #[command(flatten)]
    bounds: Bounds,
    #[command(flatten)]
    components: Components,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
