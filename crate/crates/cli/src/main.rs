//! `pplab`: thin command-line front end over the experiment runners.
//!
//! The formatted report (JSON or CSV) goes to `--out` or stdout; a
//! human-readable table goes to stderr unless `--quiet`. The exit code is 0
//! exactly when every row of the report passes.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use paraproduct_lab::experiments::{
    run_bmo_identity, run_column_example, run_hadamard_gap, run_matrix_lift, run_matrix_query,
    run_necessary_conditions, run_norm_query, run_random_norms, ExperimentConfig,
    ExperimentReport, ReportRow,
};
use paraproduct_lab::sequences::{read_sequence_json, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "pplab",
    about = "Numerical laboratory for mixed bi-parameter dyadic paraproducts",
    version
)]
struct Cli {
    /// Base seed for all randomised trials.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Truncation depth for ad-hoc norm queries (defaults to the minimal
    /// exact depth of the loaded sequence).
    #[arg(long, global = true)]
    depth: Option<u32>,

    /// Tolerance used by the iterative spectral engine and the inequality
    /// slack of the property experiments.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Report format written to --out or stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write the formatted report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress the human-readable table on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix lift equality: spectral norm of A against the truncated
    /// operator norm of the lifted sequence, on seeded random matrices.
    VerifyThm1 {
        /// Matrix size (1..=8).
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Orthogonal-sign sequences: unit conditional norm, unbounded
    /// unconditional norm.
    HadamardGap {
        /// Largest Walsh exponent (0..=6).
        #[arg(long, default_value_t = 4)]
        m_max: u32,
    },
    /// Identity-lift sequence: unit norms with divergent rectangular BMO.
    BmoIdentity {
        #[arg(long, default_value_t = 8)]
        d_max: u32,
    },
    /// Column sequence: bounded product BMO with divergent pointwise
    /// multiplier norm.
    ColumnExample {
        #[arg(long, default_value_t = 12)]
        d_max: u32,
    },
    /// Necessary conditions on random sparse sequences.
    Necessary {
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Spectral norms of random ±1 matrices against √n.
    RandomNorms {
        /// Matrix size (1..=512).
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Ad-hoc norm queries for a sequence (JSON) or matrix (CSV) file.
    Norms {
        /// Sequence file: {"entries": [{"sx","px","sy","pl","val"}, ...]}.
        #[arg(long, conflicts_with = "matrix")]
        lambda: Option<PathBuf>,
        /// Matrix file: headerless CSV of rows.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut config = ExperimentConfig::default();
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.tol = tol;
    }

    match &cli.command {
        Command::VerifyThm1 { dim, trials } => {
            config.dim = *dim;
            config.trials = *trials;
            emit(&run_matrix_lift(&config)?, &cli)
        }
        Command::HadamardGap { m_max } => {
            config.m_max = *m_max;
            emit(&run_hadamard_gap(&config)?, &cli)
        }
        Command::BmoIdentity { d_max } => {
            config.d_max = *d_max;
            emit(&run_bmo_identity(&config)?, &cli)
        }
        Command::ColumnExample { d_max } => {
            config.d_max = *d_max;
            emit(&run_column_example(&config)?, &cli)
        }
        Command::Necessary { trials } => {
            config.trials = *trials;
            emit(&run_necessary_conditions(&config)?, &cli)
        }
        Command::RandomNorms { n, trials } => {
            config.n = *n;
            config.trials = *trials;
            emit(&run_random_norms(&config)?, &cli)
        }
        Command::Norms { lambda, matrix } => match (lambda, matrix) {
            (Some(path), None) => {
                let file = File::open(path)
                    .with_context(|| format!("opening sequence file {}", path.display()))?;
                let seq = read_sequence_json(file)
                    .with_context(|| format!("parsing sequence file {}", path.display()))?;
                emit(&run_norm_query(&seq, cli.depth, &config)?, &cli)
            }
            (None, Some(path)) => {
                let file = File::open(path)
                    .with_context(|| format!("opening matrix file {}", path.display()))?;
                let m = DenseMatrix::read_csv(file)
                    .with_context(|| format!("parsing matrix file {}", path.display()))?;
                emit(&run_matrix_query(&m, &config)?, &cli)
            }
            _ => bail!("norms requires exactly one of --lambda or --matrix"),
        },
    }
}

fn emit<R: ReportRow>(report: &ExperimentReport<R>, cli: &Cli) -> anyhow::Result<bool> {
    let formatted = match cli.format {
        Format::Json => report.to_json().into_bytes(),
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            buf
        }
    };
    match &cli.out {
        Some(path) => {
            let mut file = File::create(path)
                .with_context(|| format!("creating output file {}", path.display()))?;
            file.write_all(&formatted)?;
        }
        None => {
            std::io::stdout().write_all(&formatted)?;
        }
    }
    if !cli.quiet {
        eprint!("{}", report.render_text());
    }
    Ok(report.pass)
}
