//! `fbgforce`: force reconstruction from FBG forceps recordings.

mod commands;
mod config;
mod error;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fbgforce", version, about = "Three-axis tip force reconstruction for FBG forceps")]
struct Cli {
    /// JSON configuration (simulator config for `simulate`, processing config otherwise)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random draw; overrides the config file
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory receiving the outputs
    #[arg(long, global = true, default_value = ".")]
    output: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic recording with ground truth
    Simulate(SimulateArgs),
    /// Fit a calibration model from loaded runs
    Calibrate(CalibrateArgs),
    /// Remove interrogator jitter from a frame
    Filter(FilterArgs),
    /// Classify each sensor pair as uniaxial or multiaxial
    Classify(ClassifyArgs),
    /// Separate each sensor pair into force and instability components
    Decouple(DecoupleArgs),
    /// Convert components (or a raw frame, naively) to forces
    Forces(ForcesArgs),
    /// Stationarity and stability statistics of a force file
    Analyze(AnalyzeArgs),
    /// Run filter, classify, decouple, forces and analyze in one go
    Pipeline(PipelineArgs),
    /// Print a summary table of a force file or a stored table
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileArg {
    Zero,
    Tearing,
    Mixed,
    PureFz,
    Ramp,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Trajectory CSV (t_s,fx_N,fy_N,fz_N) used instead of a generated profile
    #[arg(long, conflicts_with_all = ["profile", "samples", "amplitude"])]
    pub trajectory: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Peak load, N
    #[arg(long)]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Run CSV; its loaded axis is read from the `.json` file of the same stem
    #[arg(long = "run", required = true)]
    pub runs: Vec<PathBuf>,
    /// Pure axial-load run checked for sensor-4 dominance
    #[arg(long)]
    pub z_run: Option<PathBuf>,
    #[arg(long)]
    pub k_n: Option<f64>,
    /// Bend angle, rad
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Capacity, N
    #[arg(long)]
    pub capacity: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub epsilon_pm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub removed_bins: Option<usize>,
    #[arg(long)]
    pub r2_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecoupleArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    /// Output of `classify`
    #[arg(long)]
    pub classification: PathBuf,
    #[arg(long)]
    pub a2: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["components", "frame"])))]
pub struct ForcesArgs {
    /// Directory holding the output of `decouple`
    #[arg(long)]
    pub components: Option<PathBuf>,
    /// Frame decoupled with the inverse calibration matrix instead
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Sample window `a:b` (either end may be omitted)
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Ica,
    Naive,
    Both,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub decouple_mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["input", "table"])))]
pub struct ReportArgs {
    /// Force CSV to analyse
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Stored table (JSON rows of text cells), rendered as is
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
}

pub struct Ctx {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        config: cli.config,
        seed: cli.seed,
        output: cli.output,
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Calibrate(a) => commands::calibrate(&ctx, a),
        Command::Filter(a) => commands::filter(&ctx, a),
        Command::Classify(a) => commands::classify(&ctx, a),
        Command::Decouple(a) => commands::decouple(&ctx, a),
        Command::Forces(a) => commands::forces(&ctx, a),
        Command::Analyze(a) => commands::analyze(&ctx, a),
        Command::Pipeline(a) => commands::pipeline(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
