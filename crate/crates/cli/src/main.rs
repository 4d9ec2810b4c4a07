//! Command-line interface for homogeneous-flow spectral decomposition:
//! flow simulation, OrthoNS decomposition, mode filtering, the DMD-paradox
//! table and the noise/timing benchmarks. Figures are emitted as CSV or PGM
//! data; nothing is plotted here.

mod commands;
mod io;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Errors with their documented exit codes: 2 usage, 3 divergence,
/// 4 non-dissipative data, 1 anything else.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Divergence { step: usize },
    NonDissipative { step: usize },
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Divergence { .. } => 3,
            CliError::NonDissipative { .. } => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Divergence { step } => write!(f, "flow diverged at step {step}"),
            CliError::NonDissipative { step } => {
                write!(f, "non-dissipative step at snapshot index {step}")
            }
            CliError::Other(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<homoflow_core::Error> for CliError {
    fn from(e: homoflow_core::Error) -> Self {
        match e {
            homoflow_core::Error::Divergence { step } => CliError::Divergence { step },
            homoflow_core::Error::NonDissipative { step } => CliError::NonDissipative { step },
            other => CliError::Other(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "homoflow",
    version,
    about = "Spectral decomposition of homogeneous gradient flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RankArgs {
    /// Keep exactly this many modes (shrunk to the numerical rank)
    #[arg(long, conflicts_with = "tol")]
    rank: Option<usize>,
    /// Keep singular values above this relative threshold [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,
}

impl RankArgs {
    fn policy(&self) -> homoflow_core::RankPolicy {
        match (self.rank, self.tol) {
            (Some(r), _) => homoflow_core::RankPolicy::Fixed(r),
            (None, Some(t)) => homoflow_core::RankPolicy::Threshold(t),
            (None, None) => homoflow_core::RankPolicy::default(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a p-Laplacian flow and write its snapshots plus times.csv
    Flow {
        /// Input signal: single-column CSV (1D), CSV grid or PGM (2D)
        #[arg(long)]
        input: std::path::PathBuf,
        /// Homogeneity p of the functional, in [1, 2]
        #[arg(long)]
        p: f64,
        /// Gradient-magnitude regularization
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        /// Adaptive speed parameter in (0, 2); rescaled-uniform sampling
        #[arg(long, conflicts_with = "dt")]
        delta: Option<f64>,
        /// Fixed step size (stability is the caller's business)
        #[arg(long)]
        dt: Option<f64>,
        /// Number of steps to take
        #[arg(long)]
        steps: usize,
        /// Output directory for snap_NNNNNN.csv and times.csv
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Decompose a signal or a snapshot directory into OrthoNS modes (JSON)
    Decompose {
        /// Input signal for the prior pipeline
        #[arg(long, conflicts_with = "snapshots")]
        input: Option<std::path::PathBuf>,
        /// Snapshot directory (from `flow`) for the posterior pipelines
        #[arg(long)]
        snapshots: Option<std::path::PathBuf>,
        /// Homogeneity p in [1, 2)
        #[arg(long)]
        p: f64,
        /// Gradient-magnitude regularization (prior/posterior modes)
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        /// prior: evolve internally; posterior: rescale with the operator;
        /// blind: rescale from snapshots alone
        #[arg(long, value_parser = ["prior", "posterior", "blind"])]
        mode: String,
        #[command(flatten)]
        rank: RankArgs,
        /// Speed parameter for the prior evolution
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Steps for the prior evolution
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Output decomposition JSON
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Filter a stored decomposition into a signal or image
    Filter {
        /// Decomposition JSON from `decompose`
        #[arg(long)]
        dec: std::path::PathBuf,
        /// Keep modes with extinction time in MIN:MAX (inf allowed)
        #[arg(long = "keep-T", conflicts_with = "h")]
        keep_t: Option<String>,
        /// Per-mode filter coefficients, single-column CSV
        #[arg(long)]
        h: Option<std::path::PathBuf>,
        /// Output file: CSV for 1D, 16-bit PGM (+ scale sidecar) for 2D
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Tabulate the DMD paradox: fitting error vs reconstruction error
    Paradox {
        /// Homogeneity p in [1, 2)
        #[arg(long)]
        p: f64,
        /// Eigenvalue lambda < 0
        #[arg(long)]
        lambda: f64,
        /// Number of dyadically refined step sizes, starting at T/50
        #[arg(long, default_value_t = 8)]
        levels: usize,
        /// Output CSV (dt, err_dmd, err_rec_c, bound, mu_tilde)
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Monte-Carlo eigenvalue recovery under noise (DMD vs SDMD)
    BenchNoise {
        /// Trials per SNR level
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Snapshots per trajectory
        #[arg(long, default_value_t = 8)]
        snapshots: usize,
        /// Comma-separated SNR levels in dB
        #[arg(long, default_value = "-4,-2,0,2,4")]
        snr: String,
        /// RNG seed
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output CSV
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Wall-clock the decomposition pipeline over image sizes
    BenchTime {
        /// Comma-separated pixel counts
        #[arg(long)]
        sizes: String,
        /// Steps of the adaptive evolution per run
        #[arg(long, default_value_t = 30)]
        steps: usize,
        /// Output CSV (size, seconds)
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

fn init_threads() {
    let threads = std::env::var("HOMOFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Flow { input, p, eps, delta, dt, steps, out } => {
            commands::flow(&input, p, eps, delta, dt, steps, &out)
        }
        Command::Decompose { input, snapshots, p, eps, mode, rank, delta, steps, out } => {
            commands::decompose(
                input.as_deref(),
                snapshots.as_deref(),
                p,
                eps,
                &mode,
                rank.policy(),
                delta,
                steps,
                &out,
            )
        }
        Command::Filter { dec, keep_t, h, out } => {
            commands::filter(&dec, keep_t.as_deref(), h.as_deref(), &out)
        }
        Command::Paradox { p, lambda, levels, out } => {
            commands::paradox(p, lambda, levels, &out)
        }
        Command::BenchNoise { trials, snapshots, snr, seed, out } => {
            commands::bench_noise(trials, snapshots, &snr, seed, &out)
        }
        Command::BenchTime { sizes, steps, out } => commands::bench_time(&sizes, steps, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
