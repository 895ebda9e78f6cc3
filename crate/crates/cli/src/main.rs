//! `tlpca` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or argument errors, 3 I/O and parse errors,
//! 4 numerical failures.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tlpca", version, about = "Transfer-learning PCA toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a related target/source pair from the spiked subspace model.
    Synth(SynthArgs),
    /// Fit a PCA, TL-PCA-P or TL-PCA-D model.
    Fit(FitArgs),
    /// Normalized reconstruction error of a model on a dataset.
    Eval(EvalArgs),
    /// Principal angles and projection distance between two models.
    Angles(AnglesArgs),
    /// Cross-validate transfer hyperparameters.
    Cv(CvArgs),
    /// Sweep subspace dimensions and methods over repeated experiments.
    Sweep(SweepArgs),
}

/// Input matrix options shared by every command reading data.
#[derive(Args, Debug, Clone)]
pub struct MatrixOpts {
    /// Treat CSV/raw input as examples-by-rows instead of dimensions-by-rows.
    #[arg(long)]
    pub transpose: bool,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub m: usize,
    /// Leading basis columns shared by target and source.
    #[arg(long)]
    pub shared: usize,
    #[arg(long)]
    pub n_target: usize,
    #[arg(long)]
    pub n_source: usize,
    /// Also write `test.raw` with this many held-out target examples.
    #[arg(long, default_value_t = 0)]
    pub n_test: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    Pca,
    TlpcaP,
    TlpcaD,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub method: FitMethod,
    #[arg(long)]
    pub k: usize,
    /// Target training data (`.csv` or raw-f64).
    #[arg(long)]
    pub data: std::path::PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Transferred source directions (TL-PCA-P).
    #[arg(long)]
    pub m: Option<usize>,
    /// Pretrained source model (TL-PCA-P).
    #[arg(long)]
    pub source_model: Option<std::path::PathBuf>,
    /// Source data (TL-PCA-D, or TL-PCA-P pretraining).
    #[arg(long)]
    pub source_data: Option<std::path::PathBuf>,
    /// Source model dimension when pretraining from `--source-data` (default k).
    #[arg(long)]
    pub source_k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: std::path::PathBuf,
    #[command(flatten)]
    pub matrix: MatrixOpts,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: std::path::PathBuf,
    #[arg(long)]
    pub data: std::path::PathBuf,
    /// Center with the mean stored in another model file instead.
    #[arg(long, conflicts_with = "mean_data")]
    pub mean_model: Option<std::path::PathBuf>,
    /// Center with the sample mean of this matrix instead.
    #[arg(long)]
    pub mean_data: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub matrix: MatrixOpts,
}

#[derive(Args, Debug)]
pub struct AnglesArgs {
    pub first: std::path::PathBuf,
    pub second: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[arg(long, value_enum)]
    pub method: FitMethod,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub data: std::path::PathBuf,
    #[arg(long)]
    pub source_data: Option<std::path::PathBuf>,
    #[arg(long)]
    pub source_model: Option<std::path::PathBuf>,
    #[arg(long)]
    pub source_k: Option<usize>,
    /// Comma-separated alpha grid.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Comma-separated fractions of k to transfer (TL-PCA-P).
    #[arg(long, value_delimiter = ',')]
    pub m_fractions: Option<Vec<f64>>,
    #[arg(long, default_value_t = tlpca::cv::DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub matrix: MatrixOpts,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub k_values: Vec<usize>,
    /// Comma-separated subset of pca, tlpca_p, tlpca_d,
    /// pretrained_source_target_mean, pretrained_source_source_mean.
    #[arg(long, value_delimiter = ',', default_value = "pca,tlpca_p,tlpca_d")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target train pool; omit to synthesize every repetition.
    #[arg(long, requires_all = ["source", "test"])]
    pub target: Option<std::path::PathBuf>,
    #[arg(long)]
    pub source: Option<std::path::PathBuf>,
    #[arg(long)]
    pub test: Option<std::path::PathBuf>,
    /// Target train size per repetition (subsampled from `--target`, or synthesized).
    #[arg(long)]
    pub n_target: Option<usize>,
    #[arg(long)]
    pub n_source: Option<usize>,
    /// Synthesized test examples per repetition.
    #[arg(long, default_value_t = 2000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 8)]
    pub shared: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub m_fractions: Option<Vec<f64>>,
    #[arg(long, default_value_t = tlpca::cv::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Per-repetition rows (stdout when omitted).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Mean/std summary across repetitions.
    #[arg(long)]
    pub summary: Option<std::path::PathBuf>,
    #[command(flatten)]
    pub matrix: MatrixOpts,
}

fn exit_code(err: &tlpca::Error) -> u8 {
    use tlpca::Error::*;
    match err {
        Argument(_) | Dimension(_) => 2,
        Io(_) | Parse(_) => 3,
        Numeric(_) | Degenerate(_) => 4,
    }
}

fn configure_threads() {
    let threads = std::env::var("TLPCA_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if threads > 0 {
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Synth(args) => commands::synth(&args),
        Command::Fit(args) => commands::fit(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Angles(args) => commands::angles(&args),
        Command::Cv(args) => commands::cv(&args),
        Command::Sweep(args) => commands::sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
