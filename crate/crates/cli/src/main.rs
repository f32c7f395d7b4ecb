//! `hemato`: classify models, scan envelopes, check hypotheses, find periodic
//! orbits, simulate and synthesize parameters.
//!
//! Exit codes: 0 success, 1 a hypothesis or orbit count is not met, 2 bad input.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use config::{parse_gamma_spec, GammaSpec, GridArgs, OrbitArgs};

#[derive(Parser)]
#[command(name = "hemato", version, about = "Periodic solutions of the multi-delay Mackey-Glass hematopoiesis model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exponent classes and the growth case.
    Classify { model: PathBuf },
    /// Tabulate alpha and beta on a gamma grid (envelope.csv, envelope_summary.csv).
    Scan {
        model: PathBuf,
        /// Gamma grid as lo:step:hi.
        #[arg(long, value_parser = parse_gamma_spec, allow_hyphen_values = true)]
        gamma: GammaSpec,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Check the existence or multiplicity hypotheses (report.toml).
    #[command(group(ArgGroup::new("theorem").required(true).args(["existence", "multiplicity"])))]
    Check {
        model: PathBuf,
        #[arg(long)]
        existence: bool,
        #[arg(long, requires = "gammas")]
        multiplicity: bool,
        /// Comma-separated, strictly increasing gammas for --multiplicity.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gammas: Vec<f64>,
        /// Witness search grid as lo:step:hi.
        #[arg(long, value_parser = parse_gamma_spec, allow_hyphen_values = true)]
        gamma: Option<GammaSpec>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Locate periodic orbits in every alternation band (orbit_<i>.csv, manifest.csv).
    FindOrbits {
        model: PathBuf,
        /// Envelope grid as lo:step:hi.
        #[arg(long, value_parser = parse_gamma_spec, allow_hyphen_values = true)]
        gamma: Option<GammaSpec>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        orbit: OrbitArgs,
    },
    /// Integrate from a constant history (trajectory.csv).
    Simulate {
        model: PathBuf,
        /// Constant initial concentration.
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 10.0)]
        periods: f64,
        #[arg(long, default_value_t = 256)]
        steps_per_period: usize,
        #[arg(long, value_enum, default_value_t = StateVariable::Log)]
        mode: StateVariable,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Choose lambdas making alpha(gamma1, .) > 0 > beta(gamma2, .) (synthesized.model).
    ///
    /// The model file supplies r, m, n, b and the delays; its lambdas are ignored.
    Synthesize {
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma1: f64,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run the bundled six-orbit example end to end (summary.txt, inequalities.csv, orbits).
    ReproduceExample {
        /// Use this model instead of the bundled one.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Envelope grid as lo:step:hi.
        #[arg(long, value_parser = parse_gamma_spec, allow_hyphen_values = true)]
        gamma: Option<GammaSpec>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        orbit: OrbitArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateVariable {
    /// y = ln x
    Log,
    X,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
