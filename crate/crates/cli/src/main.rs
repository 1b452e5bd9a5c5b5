//! photonchain command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "photonchain", version, about = "Sequential photon-emission simulation and tomography")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Device parameter file (TOML or JSON, chosen by extension).
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Exact cell probabilities instead of sampled counts.
    #[arg(long, global = true)]
    pub analytic: bool,
    /// Apply idle decoherence after every cycle.
    #[arg(long, global = true, conflicts_with = "noiseless")]
    pub noisy: bool,
    /// Unitary gates only (default).
    #[arg(long, global = true)]
    pub noiseless: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a photon chain: state JSON and flux CSV.
    Generate(commands::GenerateArgs),
    /// Heterodyne tomography round trip of a simulated chain.
    Tomo(commands::TomoArgs),
    /// Localizable negativity against photon separation.
    Entcurve(commands::EntcurveArgs),
    /// Cardinal-state process tomography of one cycle map.
    Procmap(commands::ProcmapArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(&cli.global, a),
        Command::Tomo(a) => commands::tomo(&cli.global, a),
        Command::Entcurve(a) => commands::entcurve(&cli.global, a),
        Command::Procmap(a) => commands::procmap(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
