//! Wall-clock timing of the two pipeline phases: field construction and
//! field-based rescaling (including enhancement).
//!
//! Image decode and encode stay outside the timed brackets, runs are
//! single-threaded, and a few warm-up iterations are excluded from the
//! statistics so caches and the allocator settle first.

use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::field::build_fields;
use crate::frame::RawFrame;
use crate::params::{default_les_distance, FieldscaleParams};
use crate::rescale::rescale_with_fields;

/// Warm-up iterations excluded from statistics.
pub const DEFAULT_WARMUP: usize = 3;

/// Which preset a timing record was taken under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchSetting {
    Default,
    Fast,
    Custom,
}

impl BenchSetting {
    fn classify(params: &FieldscaleParams) -> Self {
        if *params == FieldscaleParams::default() {
            BenchSetting::Default
        } else if *params == FieldscaleParams::fast() {
            BenchSetting::Fast
        } else {
            BenchSetting::Custom
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BenchSetting::Default => "default",
            BenchSetting::Fast => "fast",
            BenchSetting::Custom => "custom",
        }
    }
}

/// Mean and population standard deviation, in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseStats {
    pub mean_ms: f64,
    pub std_ms: f64,
}

impl PhaseStats {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        Self {
            mean_ms: mean,
            std_ms: var.sqrt(),
        }
    }
}

/// Timing summary over `samples` pipeline executions.
///
/// Each sample's total is the sum of its two phase brackets, so the total
/// mean equals the sum of phase means exactly and no overhead hides
/// between phases.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRecord {
    pub setting: BenchSetting,
    pub field_construction: PhaseStats,
    pub rescaling: PhaseStats,
    pub total: PhaseStats,
    pub samples: usize,
    pub width: usize,
    pub height: usize,
}

/// Times `repeats` runs over every frame with the default warm-up.
pub fn bench_pipeline(
    frames: &[RawFrame],
    params: &FieldscaleParams,
    repeats: usize,
) -> Result<TimingRecord> {
    bench_pipeline_with_warmup(frames, params, repeats, DEFAULT_WARMUP)
}

/// Times `repeats` runs over every frame, excluding `warmup` untimed runs
/// on the first frame.
pub fn bench_pipeline_with_warmup(
    frames: &[RawFrame],
    params: &FieldscaleParams,
    repeats: usize,
    warmup: usize,
) -> Result<TimingRecord> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("benchmark needs at least one frame".into()));
    }
    if repeats == 0 {
        return Err(Error::Parameter("repeats must be at least 1".into()));
    }
    params.validate_for(&frames[0])?;

    for _ in 0..warmup {
        black_box(run_once(&frames[0], params)?);
    }

    let mut fc = Vec::with_capacity(frames.len() * repeats);
    let mut rs = Vec::with_capacity(frames.len() * repeats);
    for frame in frames {
        for _ in 0..repeats {
            let (fc_ms, rs_ms) = run_once(frame, params)?;
            fc.push(fc_ms);
            rs.push(rs_ms);
        }
    }
    let totals: Vec<f64> = fc.iter().zip(&rs).map(|(a, b)| a + b).collect();
    Ok(TimingRecord {
        setting: BenchSetting::classify(params),
        field_construction: PhaseStats::from_samples(&fc),
        rescaling: PhaseStats::from_samples(&rs),
        total: PhaseStats::from_samples(&totals),
        samples: fc.len(),
        width: frames[0].width(),
        height: frames[0].height(),
    })
}

fn run_once(frame: &RawFrame, params: &FieldscaleParams) -> Result<(f64, f64)> {
    let t0 = Instant::now();
    let (fmin, fmax) = build_fields::<f64>(frame, params)?;
    let fc_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let mut image = rescale_with_fields(frame, &fmin, &fmax)?;
    if params.enhance_enabled {
        image = crate::enhance::gamma_correct(&image, params.gamma)?;
        image = crate::enhance::clahe(
            &image,
            params.clahe_clip_limit,
            params.clahe_tiles_rows,
            params.clahe_tiles_cols,
        )?;
    }
    let rs_ms = t1.elapsed().as_secs_f64() * 1e3;
    black_box(&image);
    Ok((fc_ms, rs_ms))
}

/// Parameter axis swept by [`bench_sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    GridSize,
    MpIterations,
    LesDistance,
    LesThreshold,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::GridSize => "grid_size",
            SweepAxis::MpIterations => "mp_iterations",
            SweepAxis::LesDistance => "les_distance",
            SweepAxis::LesThreshold => "les_threshold",
        }
    }

    /// Defaults with this axis set to `value`. A grid-size sweep also
    /// rescales the suppression distance the way `with_grid` does.
    pub fn apply(&self, value: f64) -> FieldscaleParams {
        let mut params = FieldscaleParams::default();
        match self {
            SweepAxis::GridSize => {
                let n = value as usize;
                params.grid_rows = n;
                params.grid_cols = n;
                params.les_distance = default_les_distance(n);
            }
            SweepAxis::MpIterations => params.mp_iterations = value as usize,
            SweepAxis::LesDistance => params.les_distance = value as usize,
            SweepAxis::LesThreshold => params.les_threshold = value,
        }
        params
    }
}

/// Runs [`bench_pipeline`] once per axis value, other parameters at
/// defaults. Returns `(value, record)` pairs in input order.
pub fn bench_sweep(
    frames: &[RawFrame],
    axis: SweepAxis,
    values: &[f64],
    repeats: usize,
) -> Result<Vec<(f64, TimingRecord)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&v| Ok((v, bench_pipeline(frames, &axis.apply(v), repeats)?)))
        .collect()
}

/// CSV emission with the fixed schema
/// `setting,axis,value,phase,mean_ms,std_ms,samples,width,height`;
/// three phase rows per record. Plain (non-sweep) runs carry `-` in the
/// axis and value columns.
pub fn write_timings_csv<W: Write>(
    writer: W,
    rows: &[(String, String, TimingRecord)],
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    let csv_err = |e: csv::Error| Error::Parameter(format!("csv write failed: {e}"));
    w.write_record([
        "setting", "axis", "value", "phase", "mean_ms", "std_ms", "samples", "width", "height",
    ])
    .map_err(csv_err)?;
    for (axis, value, record) in rows {
        for (phase, stats) in [
            ("field_construction", record.field_construction),
            ("rescaling", record.rescaling),
            ("total", record.total),
        ] {
            w.write_record([
                record.setting.label(),
                axis.as_str(),
                value.as_str(),
                phase,
                &format!("{:.4}", stats.mean_ms),
                &format!("{:.4}", stats.std_ms),
                &record.samples.to_string(),
                &record.width.to_string(),
                &record.height.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
        .map_err(|e| Error::Parameter(format!("csv flush failed: {e}")))?;
    Ok(())
}
