//! Classical global rescaling methods used as comparison baselines.
//!
//! All of these are 1D transfer functions: every pixel maps through the
//! same intensity curve, with no spatial adaptation.

use crate::blur::gaussian_blur;
use crate::error::{Error, Result};
use crate::frame::{Image8, RawFrame};
use crate::rescale::clamp_round_u8;

/// Endpoints for a linear rescale. Construction repairs degenerate input
/// (`hi <= lo`) by widening to `lo + 1`, which maps constant frames to
/// all-zero output instead of dividing by zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClipBounds {
    lo: f64,
    hi: f64,
}

impl ClipBounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        let hi = if hi <= lo { lo + 1.0 } else { hi };
        Self { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Linear rescale with fixed endpoints: `255 * (I - lo) / (hi - lo)`,
/// rounded with ties away from zero, clamped to `[0, 255]`.
pub fn linear_rescale(frame: &RawFrame, bounds: ClipBounds) -> Image8 {
    let (lo, hi) = (bounds.lo, bounds.hi);
    let data = frame
        .data()
        .iter()
        .map(|&px| clamp_round_u8((255.0 * (px as f64 - lo)) / (hi - lo)))
        .collect();
    Image8::new(frame.width(), frame.height(), data).expect("frame dims are valid")
}

/// Linear rescaling with the frame's global min/max as endpoints.
pub fn minmax_rescale(frame: &RawFrame) -> Image8 {
    let (lo, hi) = frame.min_max();
    linear_rescale(frame, ClipBounds::new(lo as f64, hi as f64))
}

/// Nearest-rank percentile pair of the frame's intensity multiset.
///
/// Rank is `ceil(pct/100 * n)` (1-based) with 0% mapping to the minimum.
/// Products like `0.99 * 100` carry float representation error, so ranks
/// within 1e-9 of an integer snap to it before the ceiling.
pub fn percentile_values(frame: &RawFrame, lo_pct: f64, hi_pct: f64) -> Result<(f64, f64)> {
    if !(0.0 <= lo_pct && lo_pct < hi_pct && hi_pct <= 100.0) {
        return Err(Error::Parameter(format!(
            "percentiles must satisfy 0 <= lo < hi <= 100, got ({lo_pct}, {hi_pct})"
        )));
    }
    let mut sorted = frame.data().to_vec();
    sorted.sort_unstable();
    let pick = |pct: f64| -> f64 {
        let n = sorted.len();
        if pct <= 0.0 {
            return sorted[0] as f64;
        }
        let r = pct / 100.0 * n as f64;
        let rank = if (r - r.round()).abs() < 1e-9 {
            r.round() as usize
        } else {
            r.ceil() as usize
        };
        sorted[rank.clamp(1, n) - 1] as f64
    };
    Ok((pick(lo_pct), pick(hi_pct)))
}

/// Linear rescaling clipped at the given percentiles (defaults 1 and 99).
pub fn clip_percentile_rescale(frame: &RawFrame, lo_pct: f64, hi_pct: f64) -> Result<Image8> {
    let (lo, hi) = percentile_values(frame, lo_pct, hi_pct)?;
    Ok(linear_rescale(frame, ClipBounds::new(lo, hi)))
}

/// Video variant: per-frame percentile pairs are averaged into one shared
/// pair of endpoints, then every frame is rescaled with them.
pub fn clip_video_rescale(frames: &[RawFrame], lo_pct: f64, hi_pct: f64) -> Result<Vec<Image8>> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("clip_video_rescale needs frames".into()));
    }
    let mut lo_sum = 0.0;
    let mut hi_sum = 0.0;
    for frame in frames {
        let (lo, hi) = percentile_values(frame, lo_pct, hi_pct)?;
        lo_sum += lo;
        hi_sum += hi;
    }
    let n = frames.len() as f64;
    let bounds = ClipBounds::new(lo_sum / n, hi_sum / n);
    Ok(frames
        .iter()
        .map(|frame| linear_rescale(frame, bounds))
        .collect())
}

const HE_BINS: usize = 30;

/// Histogram equalization over 30 uniform bins spanning the frame's
/// occupied intensity range: each pixel maps to `round(255 * cdf(bin))`.
pub fn he30_rescale(frame: &RawFrame) -> Image8 {
    let (lo, hi) = frame.min_max();
    let span = hi as u32 - lo as u32 + 1;
    let bin_of = |v: u16| ((v as u32 - lo as u32) as u64 * HE_BINS as u64 / span as u64) as usize;

    let mut hist = [0u64; HE_BINS];
    for &v in frame.data() {
        hist[bin_of(v)] += 1;
    }
    let total = frame.data().len() as f64;
    let mut cdf = [0.0f64; HE_BINS];
    let mut cum = 0u64;
    for (slot, &h) in cdf.iter_mut().zip(&hist) {
        cum += h;
        *slot = cum as f64 / total;
    }
    let data = frame
        .data()
        .iter()
        .map(|&v| clamp_round_u8(255.0 * cdf[bin_of(v)]))
        .collect();
    Image8::new(frame.width(), frame.height(), data).expect("frame dims are valid")
}

/// 30-bin histogram equalization followed by CLAHE at the default clip
/// limit and tiling (tiles shrink to fit small frames).
pub fn he30_clahe(frame: &RawFrame) -> Image8 {
    let equalized = he30_rescale(frame);
    let tiles_r = 8.min(equalized.height());
    let tiles_c = 8.min(equalized.width());
    crate::enhance::clahe(&equalized, 2.0, tiles_r, tiles_c)
        .expect("clamped tiling and default clip limit are valid")
}

pub const RETINEX_SIGMAS: [f64; 3] = [15.0, 80.0, 250.0];

fn validate_sigmas(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() {
        return Err(Error::Parameter("at least one blur scale required".into()));
    }
    if sigmas.iter().any(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::Parameter("blur scales must be positive".into()));
    }
    Ok(())
}

/// Multi-scale retinex: averages `log(I+1) - log(blur(I)+1)` over the blur
/// scales, then stretches the result to `[0, 255]` by its own extrema.
pub fn msr_rescale(frame: &RawFrame, sigmas: &[f64]) -> Result<Image8> {
    validate_sigmas(sigmas)?;
    let intensity: Vec<f64> = frame.data().iter().map(|&v| v as f64).collect();
    let log_input: Vec<f64> = intensity.iter().map(|&v| (v + 1.0).ln()).collect();

    let mut retinex = vec![0.0f64; intensity.len()];
    for &sigma in sigmas {
        let blurred = gaussian_blur(&intensity, frame.width(), frame.height(), sigma);
        for ((acc, &log_i), &b) in retinex.iter_mut().zip(&log_input).zip(&blurred) {
            *acc += log_i - (b + 1.0).ln();
        }
    }
    let k = sigmas.len() as f64;
    for v in &mut retinex {
        *v /= k;
    }
    Ok(stretch_to_image(&retinex, frame.width(), frame.height()))
}

/// Simplified conditional-Gaussian-filter rescaling: log-compress, subtract
/// the average of the multiscale blurred log image, clip the residual at
/// mean +/- 3 standard deviations, and stretch to `[0, 255]`.
///
/// This is a deliberate simplification: the blur kernels are plain
/// Gaussians, with no intensity conditioning.
pub fn cgf_rescale(frame: &RawFrame, sigmas: &[f64]) -> Result<Image8> {
    validate_sigmas(sigmas)?;
    let log_input: Vec<f64> = frame
        .data()
        .iter()
        .map(|&v| (v as f64 + 1.0).ln())
        .collect();

    let mut blur_avg = vec![0.0f64; log_input.len()];
    for &sigma in sigmas {
        let blurred = gaussian_blur(&log_input, frame.width(), frame.height(), sigma);
        for (acc, &b) in blur_avg.iter_mut().zip(&blurred) {
            *acc += b;
        }
    }
    let k = sigmas.len() as f64;
    let mut detail: Vec<f64> = log_input
        .iter()
        .zip(&blur_avg)
        .map(|(&l, &b)| l - b / k)
        .collect();

    clip_symmetric(&mut detail, 3.0);
    Ok(stretch_to_image(&detail, frame.width(), frame.height()))
}

/// Clips values to `mean +/- factor * stddev` of their own distribution.
fn clip_symmetric(values: &mut [f64], factor: f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let dev = factor * var.sqrt();
    let (lo, hi) = (mean - dev, mean + dev);
    for v in values {
        *v = v.clamp(lo, hi);
    }
}

/// Stretches arbitrary reals onto `[0, 255]` by their own min/max, with
/// the same degeneracy rule and quantization as the linear baselines.
fn stretch_to_image(values: &[f64], width: usize, height: usize) -> Image8 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bounds = ClipBounds::new(lo, hi);
    let data = values
        .iter()
        .map(|&v| clamp_round_u8((255.0 * (v - bounds.lo)) / (bounds.hi - bounds.lo)))
        .collect();
    Image8::new(width, height, data).expect("caller passes matching dims")
}
