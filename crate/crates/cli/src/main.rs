//! `gems`: geometric median and mean shapes from the command line.
//!
//! Inputs must already be registered to a common frame; no alignment is done.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gems_core::raster::GridDims;

#[derive(Debug, Parser)]
#[command(name = "gems", version, about = "Geometric median and mean shapes of contours")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Median (or mean) shape of closed contours.
    Median(MedianArgs),
    /// Consensus of frame-touching segmentations over a grayscale tile.
    Consensus(ConsensusArgs),
    /// Distances between one contour and one or more others.
    Distance(DistanceArgs),
    /// Local optimality audit of a median against random offsets.
    Audit(AuditArgs),
    /// Generate wobbly circles and outliers.
    Synth(SynthArgs),
    /// Generate a cell-grid tile with several segmentations of it.
    SynthTiles(TileArgs),
    /// Median and mean drift as outliers are added to a synthetic pool.
    EvalOutliers(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BitmapFormat {
    /// Plain text PBM.
    P1,
    /// Binary PBM.
    P4,
}

#[derive(Debug, Args)]
struct PruneArgs {
    /// Fraction of inputs below which a background-level edge is pruned.
    #[arg(long, default_value_t = 0.20)]
    edge_count_threshold: f64,
    /// Chebyshev radius within which an input counts as present.
    #[arg(long, default_value_t = 1)]
    presence_dilation: usize,
    /// Maximum gap between an edge's mean intensity and the background level.
    #[arg(long, default_value_t = 10.0)]
    background_tolerance: f64,
}

#[derive(Debug, Args)]
struct MedianArgs {
    /// Contour files (PBM), or one directory of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Minimum basin depth h, in accumulated-field units.
    #[arg(long)]
    height: f64,
    #[arg(long, value_enum, default_value_t = Mode::Median)]
    mode: Mode,
    /// Run the augmented pipeline (requires --image).
    #[arg(long, requires = "image")]
    augmented: bool,
    /// Grayscale tile for the augmented pipeline.
    #[arg(long)]
    image: Option<PathBuf>,
    #[command(flatten)]
    prune: PruneArgs,
    #[arg(long, value_enum, default_value_t = BitmapFormat::P1)]
    format: BitmapFormat,
    /// Also write intermediate rasters here.
    #[arg(long)]
    debug_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ConsensusArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    height: f64,
    #[command(flatten)]
    prune: PruneArgs,
    #[arg(long, value_enum, default_value_t = BitmapFormat::P1)]
    format: BitmapFormat,
    #[arg(long)]
    debug_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    source: PathBuf,
    #[arg(required = true)]
    targets: Vec<PathBuf>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    height: f64,
    #[arg(long, value_enum, default_value_t = Mode::Median)]
    mode: Mode,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_dims(s: &str) -> Result<GridDims, String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w: usize = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: usize = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    GridDims::new(w, h).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
struct SynthFlags {
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_dims, default_value = "400x400")]
    dims: GridDims,
    #[arg(long, default_value_t = 13)]
    circles: usize,
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[arg(long, default_value_t = 3.0)]
    center_jitter: f64,
    #[arg(long, default_value_t = 4.0)]
    radius_jitter: f64,
    #[arg(long, default_value_t = 3.0)]
    wobble: f64,
    #[arg(long, default_value_t = 14)]
    outliers: usize,
    /// blob, band, scatter, or mixed.
    #[arg(long, default_value = "mixed")]
    outlier_kind: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    spec: SynthFlags,
    #[arg(long, value_enum, default_value_t = BitmapFormat::P1)]
    format: BitmapFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TileArgs {
    #[arg(long, value_parser = parse_dims, default_value = "800x800")]
    dims: GridDims,
    /// Cells per axis.
    #[arg(long, default_value_t = 6)]
    cells: usize,
    #[arg(long, default_value_t = 16)]
    segmentations: usize,
    /// Per-vertex displacement bound of each annotator, in pixels.
    #[arg(long, default_value_t = 1)]
    jitter: i64,
    /// Number of segmentations carrying a dangling scribble.
    #[arg(long, default_value_t = 1)]
    scribbles: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BitmapFormat::P1)]
    format: BitmapFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    spec: SynthFlags,
    #[arg(long, default_value_t = 14)]
    k_max: usize,
    /// Basin depth for the median runs.
    #[arg(long, default_value_t = commands::DEFAULT_EVAL_HEIGHT)]
    height: f64,
    /// Basin depth for the mean runs, in squared units.
    #[arg(long, default_value_t = commands::DEFAULT_EVAL_MEAN_HEIGHT)]
    mean_height: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(commands::EXIT_INPUT),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
