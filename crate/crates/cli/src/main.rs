//! `dslm-sim`: experiment driver for the load-management simulations.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "dslm-sim", version, about = "Load-management social dilemma experiments")]
struct Cli {
    /// Output directory (default: $DSLM_OUT_DIR, else ./dslm-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// 2x2 stage game, dilemma conditions and stage equilibria.
    StageGame(StageGameArgs),
    /// Discounted costs of all 64 memory-1 strategy pairs with Nash flags.
    RepeatedPayoffs(GameArgs),
    /// Replicator basins from uniformly random initial populations.
    Basins(BasinArgs),
    /// Adopter/non-adopter costs over a grid of continuation probabilities.
    Entry(EntryArgs),
    /// Eigenvalues at the turn-taking corners, closed form and numeric.
    Stability(GameArgs),
    /// Solve, evaluate or best-respond on a DSLM instance.
    Dslm(DslmArgs),
    /// Generate synthetic instances and a manifest.
    Generate(GenerateArgs),
    /// Train policy-gradient consumers.
    Train(TrainArgs),
    /// Centralized optimum against selfish learners.
    Gap(GapArgs),
}

#[derive(Args, Serialize)]
pub struct StageGameArgs {
    #[arg(long)]
    pub p: f64,
    /// Continuation probability for the turn-taking verdict.
    #[arg(long, default_value_t = 0.95)]
    pub delta: f64,
}

#[derive(Args, Serialize)]
pub struct GameArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Args, Serialize)]
pub struct BasinArgs {
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long)]
    pub delta: f64,
    /// Shape both populations with this Ω.
    #[arg(long, conflicts_with_all = ["omega_x", "omega_y"])]
    pub omega: Option<f64>,
    /// Shape population 1 only.
    #[arg(long)]
    pub omega_x: Option<f64>,
    /// Shape population 2 only.
    #[arg(long)]
    pub omega_y: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = 0.05)]
    pub class_margin: f64,
}

#[derive(Args, Serialize)]
pub struct EntryArgs {
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 100.0)]
    pub omega: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.51,0.7,0.95")]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DslmMode {
    Solve,
    Evaluate,
    BestResponse,
}

#[derive(Args, Serialize)]
pub struct DslmArgs {
    #[arg(value_enum)]
    pub mode: DslmMode,
    /// Instance JSON (default: the built-in two-consumer example).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Schedule JSON `{"start": [[..], ..]}`.
    #[arg(long, conflicts_with = "starts")]
    pub schedule: Option<PathBuf>,
    /// Inline schedule: consumers separated by `;`, appliances by `,`.
    #[arg(long)]
    pub starts: Option<String>,
    /// Focal consumer for best-response.
    #[arg(long, default_value_t = 0)]
    pub consumer: usize,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_nodes: u64,
}

#[derive(Args, Serialize)]
pub struct GenerateArgs {
    /// Generator config JSON (default: bundled profile).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Write the built-in two-consumer example instead.
    #[arg(long, conflicts_with_all = ["config", "count"])]
    pub example: bool,
}

#[derive(Args, Serialize)]
pub struct TrainArgs {
    /// Train config JSON (default: scenario-1 settings).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Day instances, cycled in order (default: the two-consumer example).
    #[arg(long)]
    pub instance: Vec<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's shaping switch.
    #[arg(long)]
    pub no_intrinsic: bool,
}

#[derive(Args, Serialize)]
pub struct GapArgs {
    /// Gap config JSON (default: bundled desk-scale profile).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = json!({ "error": { "kind": "usage", "message": e.to_string().trim() } });
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let dir = output::resolve_dir(cli.out.as_deref());
    let result = match &cli.command {
        Command::StageGame(a) => commands::stage_game(a, dir),
        Command::RepeatedPayoffs(a) => commands::repeated_payoffs(a, dir),
        Command::Basins(a) => commands::basins(a, dir),
        Command::Entry(a) => commands::entry(a, dir),
        Command::Stability(a) => commands::stability(a, dir),
        Command::Dslm(a) => commands::dslm(a, dir),
        Command::Generate(a) => commands::generate(a, dir),
        Command::Train(a) => commands::train_cmd(a, dir),
        Command::Gap(a) => commands::gap(a, dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
