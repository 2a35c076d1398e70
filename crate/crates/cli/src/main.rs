//! `fmrbench`: impute, cluster, benchmark and recommend from the command line.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod cluster;
mod impute;
mod output;
mod recommend;
mod synth;

#[derive(Parser)]
#[command(name = "fmrbench", version, about = "Grouped mixture-of-regressions clustering and KPI recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fill missing cells by soft-thresholded SVD, optionally standardize.
    Impute(impute::Args),
    /// Cluster groups by competitive learning over per-cluster regressions.
    Cluster(cluster::Args),
    /// Monte-Carlo clustering benchmark on synthetic two-law data.
    Synth(synth::Args),
    /// Solve the recommendation LP and sweep the SE floor for a cluster.
    Recommend(recommend::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Impute(a) => impute::run(&a),
        Command::Cluster(a) => cluster::run(&a),
        Command::Synth(a) => synth::run(&a),
        Command::Recommend(a) => recommend::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
