//! `slider`: derender slide images, refine predictions, score them, build
//! corpora, export training records and host the ranking arena.
//!
//! Exit codes: 0 on success, 2 for usage errors, 1 for any other failure.
//! Logs and the final error are JSON lines on stderr; results go to files
//! and a JSON summary on stdout.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "slider", version, about = "Raster slide derendering toolkit", arg_required_else_help = true)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Info)]
    log_level: LogLevel,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

#[derive(Subcommand)]
enum Command {
    /// Turn slide images into SVG plus extracted assets.
    Derender(DerenderArgs),
    /// Refine an existing SVG prediction against its slide image.
    Refine(RefineArgs),
    /// Score predictions against ground truth and print a metric table.
    Eval(EvalArgs),
    /// Build or inspect a ground-truth corpus.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Write prompt/target training records for every context kind.
    ExportTrain(ExportArgs),
    /// Human ranking service.
    #[command(subcommand)]
    Arena(ArenaCommand),
}

/// Backend and raster options shared by the model-driven commands.
#[derive(Args, Clone)]
pub struct EngineArgs {
    /// JSON file whose keys mirror the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `mock` or `http:<name>`; credentials come from SLIDER_BACKEND_<NAME>_URL / _KEY.
    #[arg(long)]
    pub backend: Option<String>,
    #[arg(long)]
    pub max_side: Option<u32>,
    #[arg(long)]
    pub inpaint_radius: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    #[arg(long)]
    pub temperature: Option<f32>,
    /// Image-to-SVG manifest answering mock requests.
    #[arg(long)]
    pub mock_manifest: Option<PathBuf>,
    /// Jitter, in percent, the mock applies to first-pass boxes.
    #[arg(long)]
    pub mock_jitter: Option<f64>,
}

#[derive(Args)]
pub struct DerenderArgs {
    /// Slide PNGs. With several inputs each gets `<out>/<stem>/`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// `skeleton` or `partial:<detections.jsonl>`.
    #[arg(long)]
    pub start: Option<String>,
    /// Refinement passes after the first.
    #[arg(long)]
    pub refine: Option<usize>,
    /// Detection confidence threshold for partial contexts.
    #[arg(long)]
    pub conf: Option<f64>,
    /// Skeleton placeholder counts.
    #[arg(long)]
    pub n_images: Option<usize>,
    #[arg(long)]
    pub n_texts: Option<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Args)]
pub struct RefineArgs {
    pub input: PathBuf,
    /// Prior prediction to refine.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub refine: Option<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Ground-truth tree; any directory holding `slide.svg` and `slide.png` is a sample.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// `[name=]dir` of predictions laid out as `<dir>/<sample id>/slide.svg`. Repeatable.
    #[arg(long)]
    pub pred: Vec<String>,
    /// Writes `metrics.jsonl`, `summary.csv` and prediction renders here.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// External perceptual scorer: `<cmd> <gt.png> <pred.png>` printing a JSON object.
    #[arg(long)]
    pub scorer: Option<String>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Flatten, normalize, group, filter and split exported slides.
    Build(DatasetBuildArgs),
    /// Histograms of a written corpus.
    Stats(DatasetStatsArgs),
}

#[derive(Args)]
pub struct DatasetBuildArgs {
    pub input: PathBuf,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub train_frac: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_images: Option<usize>,
    #[arg(long)]
    pub max_texts: Option<usize>,
    #[arg(long)]
    pub max_side: Option<u32>,
    #[arg(long)]
    pub inpaint_radius: Option<u32>,
    /// Text detections used to merge fragmented text blocks.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// External rasterizer: `<cmd> <in.svg> <out.png> <width> <height>`.
    #[arg(long)]
    pub renderer: Option<String>,
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct DatasetStatsArgs {
    pub corpus: PathBuf,
    /// Writes `stats.json` and `stats.csv` here instead of printing CSV.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExportArgs {
    pub corpus: PathBuf,
    /// Output JSONL file.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub conf: Option<f64>,
    /// Detections keyed by image path; ground-truth boxes are used when absent.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Subcommand)]
enum ArenaCommand {
    /// Serve the ranking API. The optional shared token is read from SLIDER_ARENA_TOKEN.
    Serve(ArenaServeArgs),
}

#[derive(Args)]
pub struct ArenaServeArgs {
    /// Directory of corpora: `<corpus>/<sample>/<method>.png`.
    #[arg(long)]
    pub corpora: Option<PathBuf>,
    /// Append-only event log.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub addr: Option<String>,
    /// Built UI bundle to serve.
    #[arg(long)]
    pub ui: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// A failed run: `kind` names the error class in the JSON error line.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub code: u8,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: "UsageError",
            message: message.into(),
            code: 2,
        }
    }

    pub fn module(kind: &'static str, message: impl ToString) -> Self {
        Failure {
            kind,
            message: message.to_string(),
            code: 1,
        }
    }
}

fn init_logging(level: LogLevel) {
    let level = match level {
        LogLevel::Error => tracing::Level::ERROR,
        LogLevel::Warn => tracing::Level::WARN,
        LogLevel::Info => tracing::Level::INFO,
        LogLevel::Debug => tracing::Level::DEBUG,
        LogLevel::Trace => tracing::Level::TRACE,
    };
    tracing_subscriber::fmt()
        .json()
        .with_max_level(level)
        .with_writer(std::io::stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    init_logging(cli.log_level);
    let result = match cli.command {
        Command::Derender(a) => commands::derender(&a),
        Command::Refine(a) => commands::refine(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Dataset(DatasetCommand::Build(a)) => commands::dataset_build(&a),
        Command::Dataset(DatasetCommand::Stats(a)) => commands::dataset_stats(&a),
        Command::ExportTrain(a) => commands::export_train(&a),
        Command::Arena(ArenaCommand::Serve(a)) => commands::arena_serve(&a),
    };
    match result {
        Ok(summary) => {
            if !summary.is_null() {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            let line = serde_json::json!({ "error": { "kind": f.kind, "message": f.message } });
            eprintln!("{line}");
            ExitCode::from(f.code)
        }
    }
}
