mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "budyko", version, about = "Energy balance model with a dynamic ice line")]
struct Cli {
    /// Flat JSON file of parameters and command options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set D=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Directory that receives the output files.
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Insolation coefficients, basis Lipschitz constants and mode relaxation rates.
    Coeffs,
    /// Equilibrium temperature profile T*(y) with the ice line held fixed.
    Profile(ProfileArgs),
    /// The reduced ice-line function z(eta) on a uniform grid.
    ZCurve(RangeArgs),
    /// Zeros of z and their stability.
    Equilibria(EquilibriaArgs),
    /// Iterate the full map from a state on the frozen-ice-line curve.
    Simulate(SimulateArgs),
    /// Equilibrium branch and folds as the OLR intercept A varies.
    BifurcateA(BifurcateAArgs),
    /// Equilibria per diffusivity column and the Jormungand-only window.
    BifurcateD(BifurcateDArgs),
    /// Graph-transform verification of the invariant manifold.
    ManifoldVerify(ManifoldArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Ice-line position; repeat for several profiles.
    #[arg(long)]
    pub eta: Vec<f64>,
    /// Number of y samples on [0, 1].
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Initial ice line; the temperature modes start at h0(eta0).
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BifurcateAArgs {
    /// Rows with A outside [a-min, a-max] are left out of the branch CSV.
    #[arg(long)]
    pub a_min: Option<f64>,
    #[arg(long)]
    pub a_max: Option<f64>,
    /// Branch samples per smooth piece of [0, 1].
    #[arg(long)]
    pub points_per_piece: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BifurcateDArgs {
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    /// Column spacing, at most 0.005.
    #[arg(long)]
    pub d_grid_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ManifoldArgs {
    /// Random initial states for the attraction check.
    #[arg(long)]
    pub states: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sup-change tolerance of the fixed-graph iteration.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub attraction_steps: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::load(cli.config.as_deref(), &cli.set)?;
    let out = output::Output::new(&cli.out)?;
    commands::dispatch(&cli.command, &cfg, &out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::to_string(&e.record()).expect("error record serializes");
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
