//! Command-line driver: dataset generation, training, evaluation, baselines
//! and the exact checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "photon-qcbm", version, about = "Photonic circuit Born machines trained on the MMD", args_override_self = true)]
pub struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "PHOTON_QCBM_THREADS")]
    pub threads: Option<usize>,

    /// key = value file of flags; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a dataset file.
    #[command(subcommand)]
    GenDataset(GenDataset),
    /// Train a circuit on a dataset.
    Train(TrainArgs),
    /// Evaluate a checkpoint against a test set.
    Eval(EvalArgs),
    /// Score a classical baseline or the test-to-test reference.
    Baseline(BaselineArgs),
    /// Compare exact gradients with finite differences on a random circuit.
    CheckGrad(CheckGradArgs),
    /// Exact MMD identities on a random circuit.
    Oracle(OracleArgs),
}

#[derive(Subcommand, Debug)]
pub enum GenDataset {
    /// Samples from a Haar-random interferometer.
    Boson(BosonArgs),
    /// Uniform fixed-weight bitstrings.
    Uniform(UniformArgs),
    /// Rankings or expression tables turned into fixed-weight bitstrings.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
pub struct BosonArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub seed: u64,
    /// Keep only outcomes with at most one photon per mode.
    #[arg(long)]
    pub collision_free: bool,
    #[arg(long, default_value = "dataset.txt")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct UniformArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "dataset.txt")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum IngestFormat {
    /// PrefLib strict orders, `count: a,b,c,…`
    Preflib,
    /// One comma-separated ranking per line
    Rankings,
    /// CSV with a header row of item ids and one score row per sample
    Expression,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: IngestFormat,
    #[arg(long)]
    pub input: PathBuf,
    /// Number of items (rankings only; expression tables use the universe size).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: usize,
    /// Comma-separated item ids forming the universe (expression only; default: every column).
    #[arg(long)]
    pub universe: Option<String>,
    /// Rank expression scores by signed value instead of magnitude.
    #[arg(long)]
    pub signed: bool,
    #[arg(long, default_value = "dataset.txt")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Held-out set; without it the dataset is split by --test-fraction.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value = "qr_haar")]
    pub mesh: String,
    /// identity:<eps>, identity or random
    #[arg(long, default_value = "identity:0.5")]
    pub init: String,
    /// Comma-separated 1-based input modes (default: the first n).
    #[arg(long)]
    pub input_modes: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    /// Warm-start bandwidths as sigma:steps,… (must cover --steps)
    #[arg(long)]
    pub sigma_schedule: Option<String>,
    #[arg(long, default_value_t = 2000)]
    pub kbatch: usize,
    #[arg(long, default_value_t = 2000)]
    pub zbatch: usize,
    #[arg(long, default_value_t = 256)]
    pub xbatch: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = 50)]
    pub eval_every: usize,
    /// Reuse the first step's masks, sign vectors and minibatch throughout.
    #[arg(long)]
    pub frozen_batches: bool,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "run")]
    pub out_dir: PathBuf,
    /// Record per-step wall time in the trace (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KernelArg {
    Mod2,
    Gaussian,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    /// Gaussian is biased when model samples contain collisions.
    #[arg(long, value_enum, default_value = "mod2")]
    pub kernel: KernelArg,
    #[arg(long, default_value = "model")]
    pub label: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "eval.csv")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BaselineKind {
    Rbm,
    Uniform,
    Test2test,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(value_enum)]
    pub kind: BaselineKind,
    /// Training data (rbm only).
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Identical to mod2 on binary test sets.
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kernel: KernelArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "baseline.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckGradArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "clements")]
    pub mesh: String,
    #[arg(long, default_value_t = 1e-6)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 200)]
    pub kbatch: usize,
    #[arg(long, default_value_t = 50)]
    pub zbatch: usize,
    #[arg(long, default_value_t = 50)]
    pub xbatch: usize,
    /// Failure threshold on the maximum relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "check_grad.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Number of random circuits.
    #[arg(long, default_value_t = 10)]
    pub circuits: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_args() -> Result<(Cli, Vec<String>, Option<PathBuf>)> {
    let mut args: Vec<String> = std::env::args().collect();
    let config_path = config::take_config_path(&mut args)?;
    if let Some(path) = &config_path {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let at = config::insertion_point(&args);
        args.splice(at..at, config::config_tokens(&text)?);
    }
    let cli = Cli::try_parse_from(&args).unwrap_or_else(|e| e.exit());
    Ok((cli, args[1..].to_vec(), config_path))
}

fn main() -> ExitCode {
    let result = parse_args().and_then(|(cli, args, config)| {
        if let Some(threads) = cli.threads.filter(|&t| t > 0) {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
        }
        commands::run(cli.command, &args, config.as_deref())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let reason = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {reason}");
            ExitCode::FAILURE
        }
    }
}
