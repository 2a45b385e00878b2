use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use skyroute::baselines::Planner;
use skyroute::scenario::DEFAULT_SEED;

/// Altitudes covered by `--sweep`, metres.
pub const SWEEP_ALTITUDES: [f64; 4] = [20.0, 40.0, 80.0, 120.0];

#[derive(Debug, Parser)]
#[command(name = "skyroute", version, about = "Cellular-connected cargo-UAV trajectory planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded scenario and write it as TOML.
    Gen(GenArgs),
    /// Build the radio map (binary map plus heat-map CSV).
    Map(MapArgs),
    /// Train one learning planner and save its table, log and best mission.
    Train(TrainArgs),
    /// Run planners side by side and write a comparison table.
    Plan(PlanArgs),
    /// Score a saved trajectory.
    Eval(EvalArgs),
}

/// Where the scenario comes from, plus overrides.
#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// A complete scenario file written by `gen`.
    #[arg(long, conflicts_with_all = ["config", "seed"])]
    pub scenario: Option<PathBuf>,
    /// Deployment and learning configuration (TOML); unset fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Deployment and training seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flight altitude in metres.
    #[arg(long)]
    pub altitude: Option<f64>,
    /// Reward weights as `en,sig,ho`; they must sum to one.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<[f64; 3]>,
    /// Training episodes.
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Output directory.
    #[arg(long, env = "SKYROUTE_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
}

impl ScenarioArgs {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Candidate cells kept per grid point.
    #[arg(long, default_value_t = 3)]
    pub mprime: usize,
    /// Build maps at 20, 40, 80 and 120 m instead of one altitude.
    #[arg(long, conflicts_with = "altitude")]
    pub sweep: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 3)]
    pub mprime: usize,
    /// A map written by `map`; built on the fly when absent.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// `proposed`, `proposed-2` or `rsrp-aware`.
    #[arg(long, default_value = "proposed")]
    pub planner: Planner,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, default_value_t = 3)]
    pub mprime: usize,
    #[arg(long, conflicts_with = "sweep")]
    pub map: Option<PathBuf>,
    /// Planners to run; all of them by default.
    #[arg(long, value_delimiter = ',')]
    pub planner: Vec<Planner>,
    /// Repeat the comparison at 20, 40, 80 and 120 m.
    #[arg(long, conflicts_with = "altitude")]
    pub sweep: bool,
    /// Also solve each instance exactly and report the gap.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Trajectory CSV written by `train` or `plan`.
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub mprime: usize,
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Report the gap to the exact optimum.
    #[arg(long)]
    pub oracle: bool,
}

fn parse_weights(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|v| format!("expected three comma-separated weights, got {}", v.len()))
}
