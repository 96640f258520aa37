//! Command-line front end: rescale single frames or directories, measure
//! image quality, and time the pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use thermofield::baselines::{
    cgf_rescale, clip_percentile_rescale, clip_video_rescale, he30_clahe, minmax_rescale,
    msr_rescale, RETINEX_SIGMAS,
};
use thermofield::bench::{bench_pipeline, bench_sweep, write_timings_csv, SweepAxis, TimingRecord};
use thermofield::io::{
    field_to_image8, load_raw, montage_horizontal, save_image8, scan_sequence, write_field_dump,
};
use thermofield::iqa::{iqa_batch, write_iqa_csv};
use thermofield::rescale::fieldscale;
use thermofield::{
    default_les_distance, FieldscaleParams, Image8, LesTarget, RawFrame, TemporalState,
};

#[derive(Parser)]
#[command(
    name = "thermofield",
    version,
    about = "Rescale RAW thermal frames (16-bit PNG/TIFF) into 8-bit images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rescale one RAW frame into an 8-bit PNG.
    Rescale(RescaleArgs),
    /// Rescale every matching RAW frame in a directory.
    Batch(BatchArgs),
    /// Compute no-reference quality metrics over a directory of 8-bit images.
    Iqa(IqaArgs),
    /// Time field construction and rescaling over a directory of RAW frames.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Fieldscale,
    Minmax,
    Clip,
    Clipvideo,
    He,
    Msr,
    Cgf,
}

#[derive(Clone, Copy, ValueEnum)]
enum LesTargetArg {
    Max,
    Both,
    None,
}

impl From<LesTargetArg> for LesTarget {
    fn from(value: LesTargetArg) -> Self {
        match value {
            LesTargetArg::Max => LesTarget::MaxOnly,
            LesTargetArg::Both => LesTarget::Both,
            LesTargetArg::None => LesTarget::Neither,
        }
    }
}

#[derive(Args)]
struct MethodArgs {
    /// Rescaling method.
    #[arg(long, value_enum, default_value_t = Method::Fieldscale)]
    method: Method,

    /// Field grid dimensions, rows then columns.
    #[arg(long, num_args = 2, value_names = ["R", "C"])]
    grid: Option<Vec<usize>>,

    /// Message-passing iterations.
    #[arg(long, conflicts_with = "fast")]
    iters: Option<usize>,

    /// Local extrema suppression threshold, in raw intensity units.
    #[arg(long, conflicts_with = "fast")]
    les_threshold: Option<f64>,

    /// Suppression neighborhood distance, in grid cells.
    #[arg(long)]
    les_distance: Option<usize>,

    /// Which grids receive suppression.
    #[arg(long, value_enum)]
    les_target: Option<LesTargetArg>,

    /// FAST preset: one message-passing iteration, threshold 800.
    #[arg(long)]
    fast: bool,

    /// Gamma for post-rescale correction (the curve raises to 1/gamma).
    #[arg(long)]
    gamma: Option<f64>,

    /// Skip gamma correction and CLAHE after rescaling.
    #[arg(long)]
    no_enhance: bool,
}

impl MethodArgs {
    fn params(&self) -> FieldscaleParams {
        let mut p = if self.fast {
            FieldscaleParams::fast()
        } else {
            FieldscaleParams::default()
        };
        if let Some(grid) = &self.grid {
            p.grid_rows = grid[0];
            p.grid_cols = grid[1];
            p.les_distance = default_les_distance(grid[0]);
        }
        if let Some(n) = self.iters {
            p.mp_iterations = n;
        }
        if let Some(t) = self.les_threshold {
            p.les_threshold = t;
        }
        if let Some(d) = self.les_distance {
            p.les_distance = d;
        }
        if let Some(target) = self.les_target {
            p.apply_les_to = target.into();
        }
        if let Some(g) = self.gamma {
            p.gamma = g;
        }
        if self.no_enhance {
            p.enhance_enabled = false;
        }
        p
    }
}

#[derive(Args)]
struct RescaleArgs {
    /// Input RAW frame (16-bit grayscale PNG or TIFF).
    input: PathBuf,

    /// Output PNG path.
    #[arg(short, long)]
    output: PathBuf,

    #[command(flatten)]
    method: MethodArgs,

    /// Write min/max field dumps (TFLD) and visualizations into DIR.
    #[arg(long, value_name = "DIR")]
    dump_fields: Option<PathBuf>,

    /// Also write a side-by-side montage PNG next to the output.
    #[arg(long)]
    montage: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// Directory of RAW frames.
    input_dir: PathBuf,

    /// Output directory for the 8-bit PNGs.
    #[arg(short, long)]
    output_dir: PathBuf,

    #[command(flatten)]
    method: MethodArgs,

    /// Temporal field smoothing weight in [0,1] (fieldscale only);
    /// frames are processed in name order.
    #[arg(long, value_name = "A", conflicts_with = "parallel")]
    smooth_alpha: Option<f64>,

    /// File-name glob for frame discovery.
    #[arg(long, default_value = "*.png")]
    pattern: String,

    /// Process frames in parallel; THERMOFIELD_THREADS caps the workers.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct IqaArgs {
    /// Directory of 8-bit grayscale images.
    input_dir: PathBuf,

    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,

    /// File-name glob for image discovery.
    #[arg(long, default_value = "*.png")]
    pattern: String,

    /// Omit the CSV header row.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of RAW frames.
    input_dir: PathBuf,

    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,

    /// Timed repeats per frame.
    #[arg(long, default_value_t = 5)]
    repeats: usize,

    /// Sweep one parameter: an axis (grid | iters | les-distance |
    /// les-threshold) and a comma-separated value list.
    #[arg(long, num_args = 2, value_names = ["AXIS", "V1,V2,..."])]
    sweep: Option<Vec<String>>,

    /// Time the FAST preset instead of DEFAULT (ignored when sweeping).
    #[arg(long)]
    fast: bool,

    /// File-name glob for frame discovery.
    #[arg(long, default_value = "*.png")]
    pattern: String,
}

fn usage_error(message: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, message)
        .exit()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rescale(args) => run_rescale(args),
        Command::Batch(args) => run_batch(args),
        Command::Iqa(args) => run_iqa(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Applies one non-fieldscale method to one frame.
fn apply_baseline(method: Method, frame: &RawFrame) -> Result<Image8> {
    Ok(match method {
        Method::Minmax => minmax_rescale(frame),
        Method::Clip => clip_percentile_rescale(frame, 1.0, 99.0)?,
        Method::Clipvideo => clip_video_rescale(std::slice::from_ref(frame), 1.0, 99.0)?
            .pop()
            .expect("one output per input frame"),
        Method::He => he30_clahe(frame),
        Method::Msr => msr_rescale(frame, &RETINEX_SIGMAS)?,
        Method::Cgf => cgf_rescale(frame, &RETINEX_SIGMAS)?,
        Method::Fieldscale => unreachable!("fieldscale handled by the caller"),
    })
}

fn run_rescale(args: RescaleArgs) -> Result<()> {
    if args.method.method != Method::Fieldscale && args.dump_fields.is_some() {
        usage_error("--dump-fields only applies to --method fieldscale");
    }
    let frame = load_raw(&args.input)?;
    let params = args.method.params();

    let (image, fields) = if args.method.method == Method::Fieldscale {
        let (image, state) = fieldscale::<f64>(&frame, &params, None)?;
        (image, state.prev)
    } else {
        (apply_baseline(args.method.method, &frame)?, None)
    };

    if let Some(dir) = &args.dump_fields {
        let (fmin, fmax) = fields.as_ref().expect("fieldscale produced fields");
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating dump directory {}", dir.display()))?;
        write_field_dump(fmin, dir.join("field_min.tfld"))?;
        write_field_dump(fmax, dir.join("field_max.tfld"))?;
        save_image8(&field_to_image8(fmin), dir.join("field_min.png"))?;
        save_image8(&field_to_image8(fmax), dir.join("field_max.png"))?;
    }

    save_image8(&image, &args.output)?;

    if args.montage {
        let input_viz = minmax_rescale(&frame);
        let mut panels: Vec<&Image8> = vec![&input_viz];
        let field_viz = fields
            .as_ref()
            .map(|(fmin, fmax)| (field_to_image8(fmin), field_to_image8(fmax)));
        if let Some((min_viz, max_viz)) = &field_viz {
            panels.push(min_viz);
            panels.push(max_viz);
        }
        panels.push(&image);
        let montage = montage_horizontal(&panels)?;
        save_image8(&montage, montage_path(&args.output))?;
    }
    Ok(())
}

fn montage_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    output.with_file_name(format!("{stem}_montage.png"))
}

fn output_name(out_dir: &Path, input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "frame".into());
    out_dir.join(format!("{stem}.png"))
}

fn batch_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("THERMOFIELD_THREADS") {
        let n: usize = raw
            .parse()
            .context("THERMOFIELD_THREADS must be a positive integer")?;
        if n == 0 {
            bail!("THERMOFIELD_THREADS must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    builder.build().context("building worker pool")
}

fn run_batch(args: BatchArgs) -> Result<()> {
    if args.smooth_alpha.is_some() && args.method.method != Method::Fieldscale {
        usage_error("--smooth-alpha only applies to --method fieldscale");
    }
    let entries = scan_sequence(&args.input_dir, &args.pattern)?;
    if entries.is_empty() {
        eprintln!(
            "warning: no files matching {:?} in {}",
            args.pattern,
            args.input_dir.display()
        );
        return Ok(());
    }
    std::fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("creating output directory {}", args.output_dir.display()))?;
    let params = args.method.params();

    match args.method.method {
        // shared bounds need the whole sequence up front
        Method::Clipvideo => {
            let frames: Vec<RawFrame> = entries
                .iter()
                .map(|e| e.load())
                .collect::<thermofield::Result<_>>()?;
            let outputs = clip_video_rescale(&frames, 1.0, 99.0)?;
            for (entry, image) in entries.iter().zip(&outputs) {
                save_image8(image, output_name(&args.output_dir, &entry.path))?;
            }
        }
        Method::Fieldscale => {
            let alpha = args.smooth_alpha.unwrap_or(0.0);
            if args.parallel {
                run_parallel(&entries, &args.output_dir, |frame| {
                    Ok(fieldscale::<f64>(frame, &params, None)?.0)
                })?;
            } else {
                let mut state = Some(TemporalState::new(alpha)?);
                for entry in &entries {
                    let frame = entry.load()?;
                    let (image, next) = fieldscale(&frame, &params, state.take())?;
                    save_image8(&image, output_name(&args.output_dir, &entry.path))?;
                    state = Some(next);
                }
            }
        }
        method => {
            if args.parallel {
                run_parallel(&entries, &args.output_dir, |frame| {
                    apply_baseline(method, frame)
                })?;
            } else {
                for entry in &entries {
                    let image = apply_baseline(method, &entry.load()?)?;
                    save_image8(&image, output_name(&args.output_dir, &entry.path))?;
                }
            }
        }
    }
    Ok(())
}

fn run_parallel(
    entries: &[thermofield::io::DatasetEntry],
    out_dir: &Path,
    op: impl Fn(&RawFrame) -> Result<Image8> + Sync,
) -> Result<()> {
    use rayon::prelude::*;
    batch_pool()?.install(|| {
        entries.par_iter().try_for_each(|entry| {
            let image = op(&entry.load()?)?;
            save_image8(&image, output_name(out_dir, &entry.path))?;
            Ok(())
        })
    })
}

fn run_iqa(args: IqaArgs) -> Result<()> {
    let entries = scan_sequence(&args.input_dir, &args.pattern)?;
    let paths: Vec<PathBuf> = entries.into_iter().map(|e| e.path).collect();
    let batch = iqa_batch(&paths)?;
    for (path, reason) in &batch.failures {
        eprintln!("warning: skipped {}: {reason}", path.display());
    }
    let file = std::fs::File::create(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    write_iqa_csv(file, &batch, !args.no_header)?;
    Ok(())
}

fn parse_sweep(args: &[String]) -> Result<(SweepAxis, Vec<f64>)> {
    let axis = match args[0].as_str() {
        "grid" => SweepAxis::GridSize,
        "iters" => SweepAxis::MpIterations,
        "les-distance" => SweepAxis::LesDistance,
        "les-threshold" => SweepAxis::LesThreshold,
        other => bail!("unknown sweep axis {other:?} (expected grid, iters, les-distance or les-threshold)"),
    };
    let values = args[1]
        .split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sweep value {v:?}")))
        .collect::<Result<Vec<f64>>>()?;
    Ok((axis, values))
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let entries = scan_sequence(&args.input_dir, &args.pattern)?;
    if entries.is_empty() {
        bail!(
            "no files matching {:?} in {}",
            args.pattern,
            args.input_dir.display()
        );
    }
    let frames: Vec<RawFrame> = entries
        .iter()
        .map(|e| e.load())
        .collect::<thermofield::Result<_>>()?;

    let rows: Vec<(String, String, TimingRecord)> = match &args.sweep {
        Some(raw) => {
            let (axis, values) = parse_sweep(raw)?;
            bench_sweep(&frames, axis, &values, args.repeats)?
                .into_iter()
                .map(|(value, record)| (axis.label().to_string(), value.to_string(), record))
                .collect()
        }
        None => {
            let params = if args.fast {
                FieldscaleParams::fast()
            } else {
                FieldscaleParams::default()
            };
            let record = bench_pipeline(&frames, &params, args.repeats)?;
            vec![("-".to_string(), "-".to_string(), record)]
        }
    };
    let file = std::fs::File::create(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    write_timings_csv(file, &rows)?;
    Ok(())
}
