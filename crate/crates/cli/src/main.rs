mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Fusion-ring categorification criteria, convolution axioms, and quantum
/// convolution inequalities.
///
/// Exit codes: 0 = pass / no obstruction, 1 = violation or obstruction
/// witnessed, 2 = invalid input or usage.
#[derive(Debug, Parser)]
#[command(name = "qconv", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Global {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Absolute tolerance for pass/fail decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Optimizer starts for searches.
    #[arg(long, global = true, default_value_t = 64)]
    pub budget: usize,
    /// Random samples per check.
    #[arg(long, global = true, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a fusion ring, group table, algebra spec or convolution structure.
    Validate { path: PathBuf },
    /// Run both categorification criteria on a fusion ring.
    Categorify { path: PathBuf },
    /// Check the convolution axioms of a group, fusion ring or structure.
    Axioms { path: PathBuf },
    /// Run inequality suites on a group, fusion ring or structure.
    Inequalities {
        path: PathBuf,
        /// young, reverse-young, sumset, qeci, continuity, conv-continuity, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Sweep configuration JSON (grid, samples, seed, tol, refine_starts, refine_steps).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Check qECI at this single θ instead of the max over θ (for
        /// convolutions such as the θ-swap, where only their own θ is claimed).
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Smooth entropies and continuity bounds.
    Entropy {
        /// Algebra input (not needed for tlogt).
        path: Option<PathBuf>,
        /// smooth, smooth-entropy, smooth-conv, continuity, conv-continuity, or tlogt.
        #[arg(long)]
        op: String,
        /// Inline JSON object, a JSON file, or `key=value,...`.
        #[arg(long)]
        params: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot configure threads: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(commands::run(&cli))
}
