//! `pcq`: feature extraction, prediction, calibration, evaluation and
//! subjective-score processing for Trisoup-Lifting G-PCC streams.
//!
//! Exit codes: 0 success, 2 usage, 3 input error, 4 parse error,
//! 5 config error, 6 numeric failure.

mod commands;
mod failure;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcq_core::rng::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(
    name = "pcq",
    version,
    about = "Bitstream-layer quality model for Trisoup-Lifting G-PCC point clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a bitstream and write its feature sidecar (JSON).
    Extract(ExtractArgs),
    /// Predict MOS from sidecars, bitstreams or a directory of sidecars.
    Predict(PredictArgs),
    /// Fit model parameters from a labelled dataset CSV.
    Calibrate(CalibrateArgs),
    /// Run an evaluation protocol.
    Evaluate(EvaluateArgs),
    /// Turn raw ratings into MOS.
    Subjective(SubjectiveArgs),
}

#[derive(Args, Debug)]
struct StreamArgs {
    /// Builtin profile name or path to a profile JSON document.
    #[arg(long, default_value = "tmc13-v23")]
    profile: String,
    /// Source point count: an integer or a JSON sidecar with `point_count`.
    #[arg(long)]
    point_count: Option<String>,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    bitstream: PathBuf,
    #[command(flatten)]
    stream: StreamArgs,
    /// Content id recorded in the sidecar.
    #[arg(long)]
    content_id: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    /// Sidecar (.json), bitstream, or directory of sidecars.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Parameter JSON; the published parameters are used when omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    #[command(flatten)]
    stream: StreamArgs,
    /// Clamp predictions to [1, 100].
    #[arg(long)]
    clamp: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TcSourceArg {
    Auto,
    Reference,
    Estimated,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InterceptArg {
    Shared,
    MeanMos,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    tc_source: TcSourceArg,
    #[arg(long, value_enum, default_value = "shared")]
    intercept: InterceptArg,
    /// Take the TC-model coefficients from this parameter file instead of
    /// fitting them.
    #[arg(long)]
    tc_from: Option<PathBuf>,
    /// Directory of `<content_id>.ply` reference clouds used to fill in
    /// missing reference TC.
    #[arg(long)]
    clouds: Option<PathBuf>,
    /// Neighbourhood size for reference TC.
    #[arg(long, default_value_t = pcq_core::calibration::DEFAULT_K)]
    knn: usize,
    /// Write fit diagnostics (JSON) here.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Loocv,
    Random,
    Ablation,
    Significance,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Dataset CSV (all modes except significance).
    dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    /// Comma-separated training contents for ablation.
    #[arg(long, value_delimiter = ',')]
    train_contents: Vec<String>,
    /// Comma-separated test contents for ablation.
    #[arg(long, value_delimiter = ',')]
    test_contents: Vec<String>,
    #[arg(long, value_enum, default_value = "auto")]
    tc_source: TcSourceArg,
    /// Per-model score CSV (`stimulus_id,model_id,score`).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// MOS CSV (`stimulus_id,mos,std,n`).
    #[arg(long)]
    mos: Option<PathBuf>,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Write the rendered significance grid here.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AxisArg {
    PerObserver,
    PerStimulus,
}

#[derive(Args, Debug)]
struct SubjectiveArgs {
    /// Long-format ratings CSV (`stimulus_id,observer_id,score`).
    ratings: PathBuf,
    #[arg(long, value_enum, default_value = "per-observer")]
    axis: AxisArg,
    /// Skip observer screening.
    #[arg(long)]
    no_screen: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => commands::extract(a),
        Command::Predict(a) => commands::predict(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Subjective(a) => commands::subjective(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("pcq: {failure}");
            failure.kind.exit_code()
        }
    }
}
