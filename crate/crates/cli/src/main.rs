//! `qfp`: dataset generation, fingerprinting, training, sweeps, clustering
//! and measurement optimization from JSON pipeline configs.

mod commands;
mod config;
mod error;
mod output;
mod pipeline;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{
    ClusterArgs, FingerprintArgs, GenH2Args, OptimizeArgs, SweepArgs, TrainArgs,
};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "qfp", version, about = "Quantum fingerprint pipeline")]
struct Cli {
    /// Worker threads; defaults to the number of processors.
    #[arg(long, global = true, env = "QFP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an H2 dataset: FCIDUMPs, manifest and separation targets.
    GenH2(GenH2Args),
    /// Compute fingerprints for every molecule in a config's dataset.
    Fingerprint(FingerprintArgs),
    /// Cross-validate a model on a feature table.
    Train(TrainArgs),
    /// Repeat fingerprint + CV over values of one config axis.
    Sweep(SweepArgs),
    /// PCA + k-means over fingerprints, with an elbow report.
    Cluster(ClusterArgs),
    /// Search one-body measurements with GP optimization.
    OptimizeMeasurement(OptimizeArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::GenH2(a) => commands::gen_h2(a),
        Command::Fingerprint(a) => commands::fingerprint(a),
        Command::Train(a) => commands::train(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::OptimizeMeasurement(a) => commands::optimize_measurement(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
