use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use gems_core::gems::{local_optimality_audit, run_traced, GemsConfig, MedianResult, PipelineTrace, ShapeMode};
use gems_core::harness::{eval_outliers, overlay, EvalHeights};
use gems_core::metrics::symmetric_distance;
use gems_core::raster::{
    read_pnm, write_pnm, ContourImage, GrayImage, LabelField, PnmFormat, PnmImage, Quantization,
};
use gems_core::report::{write_distances, write_eval, write_manifest, write_summary, DistanceRow, ManifestEntry};
use gems_core::synth::{synth_circles, synth_tiles, SynthSpec, TileSpec};
use gems_core::Error;

use crate::{
    AuditArgs, BitmapFormat, Command, ConsensusArgs, DistanceArgs, EvalArgs, MedianArgs, Mode, PruneArgs, SynthArgs,
    SynthFlags, TileArgs,
};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NO_MEDIAN: u8 = 2;

pub const DEFAULT_EVAL_HEIGHT: f64 = 100.0;
pub const DEFAULT_EVAL_MEAN_HEIGHT: f64 = 10_000.0;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NoCohesiveMedian { .. }) => EXIT_NO_MEDIAN,
        _ => EXIT_INPUT,
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Median(a) => median(a),
        Command::Consensus(a) => consensus(a),
        Command::Distance(a) => distance(a),
        Command::Audit(a) => audit(a),
        Command::Synth(a) => synth(a),
        Command::SynthTiles(a) => synth_tiles_cmd(a),
        Command::EvalOutliers(a) => eval(a),
    }
}

impl From<BitmapFormat> for PnmFormat {
    fn from(f: BitmapFormat) -> Self {
        match f {
            BitmapFormat::P1 => PnmFormat::P1,
            BitmapFormat::P4 => PnmFormat::P4,
        }
    }
}

const PBM: &str = "pbm";

/// Expand a lone directory argument to its PBM files in name order.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if let [dir] = inputs {
        if dir.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "pbm"))
                .collect();
            files.sort();
            if files.is_empty() {
                bail!("no .pbm files in {}", dir.display());
            }
            return Ok(files);
        }
    }
    Ok(inputs.to_vec())
}

fn read_contour(path: &Path) -> Result<ContourImage> {
    read_pnm(path)?
        .into_bitmap()
        .with_context(|| format!("{} is not a bitmap (P1/P4)", path.display()))
}

fn read_gray(path: &Path) -> Result<GrayImage> {
    read_pnm(path)?
        .into_graymap()
        .with_context(|| format!("{} is not a graymap (P2/P5)", path.display()))
}

fn name_of(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_bitmap(path: &Path, image: &ContourImage, format: BitmapFormat) -> Result<()> {
    write_pnm(path, &PnmImage::Bitmap(image.clone()), format.into())?;
    Ok(())
}

fn write_gray(path: &Path, image: &GrayImage) -> Result<()> {
    write_pnm(path, &PnmImage::Graymap(image.clone()), PnmFormat::P5)?;
    Ok(())
}

fn create_file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn label_image(labels: &LabelField) -> Result<GrayImage> {
    let data = labels
        .as_slice()
        .iter()
        .map(|&l| if l == 0 { 0 } else { 1 + (l as u64 * 53 % 254) as u16 })
        .collect();
    Ok(GrayImage::new(labels.dims(), 255, data)?)
}

fn write_trace(dir: &Path, trace: &PipelineTrace, format: BitmapFormat) -> Result<()> {
    create_dir(dir)?;
    let field = &trace.accumulated.field;
    write_gray(&dir.join("accumulated.pgm"), &Quantization::fit(field, 65535)?.apply(field)?)?;
    write_gray(
        &dir.join("inverted.pgm"),
        &Quantization::fit(&trace.inverted, 65535)?.apply(&trace.inverted)?,
    )?;
    write_gray(&dir.join("basins.pgm"), &label_image(&trace.basins)?)?;
    write_gray(&dir.join("markers.pgm"), &label_image(&trace.markers.labels)?)?;
    write_gray(&dir.join("labels.pgm"), &label_image(&trace.labels)?)?;
    if let Some(hull) = &trace.hull {
        write_bitmap(&dir.join(format!("hull.{PBM}")), hull, format)?;
    }
    Ok(())
}

fn config_from(h: f64, mode: Mode, augmented: bool, prune: &PruneArgs) -> GemsConfig {
    GemsConfig {
        h,
        mode: match mode {
            Mode::Median => ShapeMode::Median,
            Mode::Mean => ShapeMode::Mean,
        },
        augmented,
        edge_count_threshold: prune.edge_count_threshold,
        presence_dilation: prune.presence_dilation,
        background_tolerance: prune.background_tolerance,
    }
}

struct Job<'a> {
    inputs: &'a [PathBuf],
    image: Option<&'a Path>,
    config: GemsConfig,
    stem: &'static str,
    format: BitmapFormat,
    debug_dir: Option<&'a Path>,
    out: &'a Path,
}

fn run_job(job: Job<'_>) -> Result<MedianResult> {
    let paths = expand_inputs(job.inputs)?;
    let contours = paths.iter().map(|p| read_contour(p)).collect::<Result<Vec<_>>>()?;
    let image = job.image.map(read_gray).transpose()?;
    let start = Instant::now();
    let (result, trace) = run_traced(&contours, image.as_ref(), &job.config)?;
    let elapsed = start.elapsed();
    create_dir(job.out)?;
    write_bitmap(&job.out.join(format!("{}.{PBM}", job.stem)), &result.contour, job.format)?;
    let names: Vec<String> = paths.iter().map(|p| name_of(p)).collect();
    write_summary(create_file(&job.out.join("summary.csv"))?, &names, &result)?;
    let text = result.diagnostics_text();
    fs::write(job.out.join("diagnostics.txt"), &text).context("writing diagnostics")?;
    if let Some(dir) = job.debug_dir {
        write_trace(dir, &trace, job.format)?;
    }
    eprint!("{text}");
    eprintln!("inputs: {}", contours.len());
    eprintln!("elapsed: {:.3} s", elapsed.as_secs_f64());
    Ok(result)
}

fn median(a: MedianArgs) -> Result<()> {
    let config = config_from(a.height, a.mode, a.augmented, &a.prune);
    let stem = match (a.augmented, a.mode) {
        (true, _) => "consensus",
        (false, Mode::Median) => "median",
        (false, Mode::Mean) => "mean",
    };
    run_job(Job {
        inputs: &a.inputs,
        image: a.image.as_deref().filter(|_| a.augmented),
        config,
        stem,
        format: a.format,
        debug_dir: a.debug_dir.as_deref(),
        out: &a.out,
    })?;
    Ok(())
}

fn consensus(a: ConsensusArgs) -> Result<()> {
    let paths = expand_inputs(&a.inputs)?;
    if paths.len() < 2 {
        bail!("consensus needs at least two segmentations");
    }
    run_job(Job {
        inputs: &paths,
        image: Some(&a.image),
        config: config_from(a.height, Mode::Median, true, &a.prune),
        stem: "consensus",
        format: a.format,
        debug_dir: a.debug_dir.as_deref(),
        out: &a.out,
    })?;
    Ok(())
}

fn distance(a: DistanceArgs) -> Result<()> {
    let source = read_contour(&a.source)?;
    let mut rows = Vec::with_capacity(a.targets.len());
    for t in &a.targets {
        let target = read_contour(t)?;
        rows.push(DistanceRow {
            source: name_of(&a.source),
            target: name_of(t),
            distance: symmetric_distance(&source, &target)?,
        });
    }
    match &a.out {
        Some(path) => write_distances(create_file(path)?, &rows)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            write_distances(&mut stdout, &rows)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn audit(a: AuditArgs) -> Result<()> {
    let paths = expand_inputs(&a.inputs)?;
    let contours = paths.iter().map(|p| read_contour(p)).collect::<Result<Vec<_>>>()?;
    let config = config_from(
        a.height,
        a.mode,
        false,
        &PruneArgs {
            edge_count_threshold: 0.2,
            presence_dilation: 1,
            background_tolerance: 10.0,
        },
    );
    let (result, trace) = run_traced(&contours, None, &config)?;
    let report = local_optimality_audit(&result, &trace.accumulated, a.trials, a.seed)?;
    let text = format!(
        "trials,evaluated,skipped,not_lower,ratio,median_cost\n{},{},{},{},{:.6},{:.6}\n",
        a.trials,
        report.costs.len(),
        report.skipped,
        report.not_lower(),
        report.ratio(),
        report.median_cost
    );
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn synth_spec(f: &SynthFlags) -> Result<SynthSpec> {
    Ok(SynthSpec {
        dims: f.dims,
        circles: f.circles,
        radius: f.radius,
        center_jitter: f.center_jitter,
        radius_jitter: f.radius_jitter,
        wobble: f.wobble,
        outliers: f.outliers,
        outlier_kind: f.outlier_kind.parse()?,
        seed: f.seed,
    })
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = synth_spec(&a.spec)?;
    let set = synth_circles(&spec)?;
    create_dir(&a.out)?;
    let mut manifest = Vec::new();
    for (prefix, group) in [("circle", &set.circles), ("outlier", &set.outliers)] {
        for (i, c) in group.iter().enumerate() {
            let filename = format!("{prefix}_{i:03}.{PBM}");
            write_bitmap(&a.out.join(&filename), &c.image, a.format)?;
            manifest.push(ManifestEntry {
                filename,
                kind: c.kind.to_string(),
                seed_offset: c.seed_offset,
            });
        }
    }
    write_manifest(create_file(&a.out.join("manifest.csv"))?, &manifest)?;
    eprintln!("wrote {} circles and {} outliers to {}", set.circles.len(), set.outliers.len(), a.out.display());
    Ok(())
}

fn synth_tiles_cmd(a: TileArgs) -> Result<()> {
    let spec = TileSpec {
        dims: a.dims,
        cells: a.cells,
        segmentations: a.segmentations,
        jitter: a.jitter,
        scribbles: a.scribbles,
        seed: a.seed,
    };
    let tiles = synth_tiles(&spec)?;
    create_dir(&a.out)?;
    for (i, s) in tiles.segmentations.iter().enumerate() {
        write_bitmap(&a.out.join(format!("seg_{i:03}.{PBM}")), s, a.format)?;
    }
    write_bitmap(&a.out.join(format!("truth.{PBM}")), &tiles.truth, a.format)?;
    write_gray(&a.out.join("image.pgm"), &tiles.image)?;
    eprintln!("wrote {} segmentations to {}", tiles.segmentations.len(), a.out.display());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let spec = synth_spec(&a.spec)?;
    let set = synth_circles(&spec)?;
    let heights = EvalHeights {
        median: a.height,
        mean: a.mean_height,
    };
    let start = Instant::now();
    let outcome = eval_outliers(&set, a.k_max, &GemsConfig::median(a.height), heights)?;
    create_dir(&a.out)?;
    write_eval(create_file(&a.out.join("eval.csv"))?, &outcome.rows)?;
    let pool = set.pool(a.k_max);
    write_gray(&a.out.join("overlay_median.pgm"), &overlay(&pool, &outcome.medians)?)?;
    write_gray(&a.out.join("overlay_mean.pgm"), &overlay(&pool, &outcome.means)?)?;
    for r in &outcome.rows {
        if let Some(e) = &r.error {
            eprintln!("k={}: {e}", r.k);
        }
    }
    eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    Ok(())
}
