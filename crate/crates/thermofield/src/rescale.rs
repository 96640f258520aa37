//! Applying scalar fields to a frame, the full pipeline, and temporal
//! field smoothing for video streams.

use crate::enhance::{clahe, gamma_correct};
use crate::error::{Error, Result};
use crate::field::{build_fields, enforce_separation, ScalarField};
use crate::frame::{Image8, RawFrame};
use crate::params::FieldscaleParams;
use crate::real::{real, Real};

/// Per-pixel linear rescale between the two fields, then clamp-and-convert:
/// `255 * (I - min) / (max - min)`, rounded to the nearest integer with
/// ties away from zero, clamped to `[0, 255]`.
///
/// The fields must order correctly (`max > min` at every pixel); the field
/// construction guarantees this, so a violation here is a bug and panics.
pub fn rescale_with_fields<T: Real>(
    frame: &RawFrame,
    phi_min: &ScalarField<T>,
    phi_max: &ScalarField<T>,
) -> Result<Image8> {
    for (name, field) in [("min", phi_min), ("max", phi_max)] {
        if field.width() != frame.width() || field.height() != frame.height() {
            return Err(Error::Dimension(format!(
                "{name} field is {}x{}, frame is {}x{}",
                field.width(),
                field.height(),
                frame.width(),
                frame.height()
            )));
        }
    }
    let full = real::<T>(255.0);
    let mut data = Vec::with_capacity(frame.width() * frame.height());
    for ((&px, &lo), &hi) in frame
        .data()
        .iter()
        .zip(phi_min.data())
        .zip(phi_max.data())
    {
        assert!(hi > lo, "scalar fields out of order: max {hi:?} <= min {lo:?}");
        let t = full * (T::from_u16(px).unwrap() - lo) / (hi - lo);
        data.push(clamp_round_u8(t));
    }
    Image8::new(frame.width(), frame.height(), data)
}

#[inline]
pub(crate) fn clamp_round_u8<T: Real>(t: T) -> u8 {
    let q = t.round();
    if q <= T::zero() {
        0
    } else if q >= real::<T>(255.0) {
        255
    } else {
        q.to_u8().expect("rounded value in range")
    }
}

/// Carry-over between video frames: the previous smoothed field pair and
/// the blend weight on it.
#[derive(Clone, Debug, Default)]
pub struct TemporalState<T> {
    pub prev: Option<(ScalarField<T>, ScalarField<T>)>,
    /// Weight of the previous fields, in `[0, 1]`. Zero reproduces
    /// stateless processing exactly.
    pub alpha: f64,
}

impl<T: Real> TemporalState<T> {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Parameter(format!(
                "smoothing alpha must be in [0, 1], got {alpha}"
            )));
        }
        Ok(Self { prev: None, alpha })
    }
}

/// Blends the current field pair with the previous one:
/// `alpha * prev + (1 - alpha) * current`, pixel-wise, then re-enforces
/// max/min separation. Without a previous pair the input is returned
/// unchanged. The caller stores the result as the next `prev`.
pub fn smooth_fields<T: Real>(
    current: (ScalarField<T>, ScalarField<T>),
    state: &TemporalState<T>,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let Some((prev_min, prev_max)) = &state.prev else {
        return Ok(current);
    };
    let (cur_min, cur_max) = current;
    for (prev, cur) in [(prev_min, &cur_min), (prev_max, &cur_max)] {
        if prev.width() != cur.width() || prev.height() != cur.height() {
            return Err(Error::Dimension(format!(
                "previous fields are {}x{}, current are {}x{}",
                prev.width(),
                prev.height(),
                cur.width(),
                cur.height()
            )));
        }
    }
    let a = real::<T>(state.alpha);
    let b = T::one() - a;
    let blend = |prev: &ScalarField<T>, cur: &ScalarField<T>| {
        let data = prev
            .data()
            .iter()
            .zip(cur.data())
            .map(|(&p, &c)| a * p + b * c)
            .collect();
        ScalarField::new(cur.width(), cur.height(), cur.role(), data)
    };
    let out_min = blend(prev_min, &cur_min)?;
    let mut out_max = blend(prev_max, &cur_max)?;
    enforce_separation(&out_min, &mut out_max);
    Ok((out_min, out_max))
}

/// Full pipeline for one frame: field construction, optional temporal
/// smoothing, field-based rescale, and optional gamma + CLAHE enhancement.
///
/// Returns the 8-bit image and the state to pass in with the next frame of
/// the same stream. Pass `None` for single images.
pub fn fieldscale<T: Real>(
    frame: &RawFrame,
    params: &FieldscaleParams,
    state: Option<TemporalState<T>>,
) -> Result<(Image8, TemporalState<T>)> {
    fieldscale_with_enhancer(frame, params, state, None)
}

/// [`fieldscale`] with an optional pre-rescale transform of the RAW frame.
///
/// The fields are always built from the original frame; the transformed
/// frame is what gets rescaled with them. This keeps RAW-domain
/// enhancements (sharpening, deblurring, bias correction) out of the gain
/// decision while still applying them before 8-bit quantization. No
/// concrete enhancement ships here; the hook accepts any caller-provided
/// transform that preserves dimensions.
pub fn fieldscale_with_enhancer<T: Real>(
    frame: &RawFrame,
    params: &FieldscaleParams,
    state: Option<TemporalState<T>>,
    enhancer: Option<&dyn Fn(&RawFrame) -> RawFrame>,
) -> Result<(Image8, TemporalState<T>)> {
    let fields = build_fields::<T>(frame, params)?;
    let enhanced = enhancer.map(|f| f(frame));
    let rescale_input = enhanced.as_ref().unwrap_or(frame);

    let alpha = state.as_ref().map_or(0.0, |s| s.alpha);
    let (fmin, fmax) = match &state {
        Some(s) => smooth_fields(fields, s)?,
        None => fields,
    };

    let mut image = rescale_with_fields(rescale_input, &fmin, &fmax)?;
    if params.enhance_enabled {
        image = gamma_correct(&image, params.gamma)?;
        image = clahe(
            &image,
            params.clahe_clip_limit,
            params.clahe_tiles_rows,
            params.clahe_tiles_cols,
        )?;
    }
    Ok((
        image,
        TemporalState {
            prev: Some((fmin, fmax)),
            alpha,
        },
    ))
}
