//! `vilenkin`: build trees, derive and verify multiresolution analyses and
//! wavelet banks, and run finite transforms.
//!
//! Exit status: 0 when every check passes, 1 on usage or I/O errors, 2 when a
//! mathematical verification fails. Reports go to standard output as JSON,
//! one-line summaries to standard error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vilenkin::Strategy;

#[derive(Parser, Debug)]
#[command(
    name = "vilenkin",
    version,
    about = "Orthogonal wavelets on Vilenkin groups from N-valid trees"
)]
pub struct Cli {
    /// Worker threads for the verification loops (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build, validate, enumerate and export N-valid trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Derive and verify the multiresolution analysis of a tree.
    #[command(subcommand)]
    Mra(MraCmd),
    /// Derive and verify the wavelet bank of an MRA bundle.
    #[command(subcommand)]
    Wavelet(WaveletCmd),
    /// Multilevel analysis and synthesis of sampled signals.
    #[command(subcommand)]
    Transform(TransformCmd),
}

#[derive(Subcommand, Debug)]
pub enum TreeCmd {
    /// Construct an N-valid tree.
    Build {
        #[arg(long)]
        p: u32,
        #[arg(long = "N")]
        n: u32,
        /// debruijn, greedy or min-height.
        #[arg(long, default_value = "debruijn")]
        strategy: Strategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that every length-N word occurs exactly once.
    Validate { tree: PathBuf },
    /// List every N-valid tree (p^N <= 16).
    Enumerate {
        #[arg(long)]
        p: u32,
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rebuild the tree that generates a mask (mask CSV or MRA bundle).
    FromMask {
        mask: PathBuf,
        /// Required for mask CSV input.
        #[arg(long)]
        p: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write a tree as JSON or Graphviz DOT.
    Export {
        tree: PathBuf,
        #[arg(long, default_value = "dot")]
        format: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Shift depth s: shifts range over H_0^(s).
    #[arg(long)]
    pub depth: Option<u32>,
    /// Tolerance for floating point comparisons.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum MraCmd {
    /// Mask, support set, phi, its transform and the refinement coefficients.
    Derive {
        tree: PathBuf,
        /// CSV `window,re,im` assigning phases to allowed windows.
        #[arg(long)]
        phases: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Run the mask, support, orthonormality and refinement checks on a
    /// bundle or a tree.
    Verify {
        input: PathBuf,
        #[arg(long)]
        phases: Option<PathBuf>,
        #[command(flatten)]
        check: CheckArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum WaveletCmd {
    /// Wavelet coefficients and the p - 1 wavelets of an MRA bundle.
    Derive {
        bundle: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write one CSV per wavelet and coefficient table here.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Orthogonality of the shifted scaling function and wavelets.
    Verify {
        bundle: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum TransformCmd {
    /// Coefficients of a signal CSV (`digits,re,im`).
    Analyze {
        #[arg(long)]
        bundle: PathBuf,
        signal: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        /// Resolution S of the signal; defaults to M + 1.
        #[arg(long)]
        resolution: Option<u32>,
        /// Require perfect reconstruction and Parseval's equality.
        #[arg(long)]
        expect_in_span: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Signal CSV from a coefficient bundle.
    Synthesize {
        #[arg(long)]
        bundle: PathBuf,
        coefficients: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random signal CSV, optionally inside the span of phi(A x - h).
    Random {
        #[arg(long)]
        bundle: PathBuf,
        /// Window G_{-R}.
        #[arg(long = "R")]
        r: u32,
        #[arg(long)]
        resolution: Option<u32>,
        #[arg(long)]
        in_span: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::error_code(&e))
        }
    }
}
