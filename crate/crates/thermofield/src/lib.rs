//! Locality-aware rescaling of RAW thermal-infrared frames into 8-bit
//! images.
//!
//! RAW thermal frames carry 14-bit counts whose occupied range shifts with
//! scene temperature, and a single global transfer function wastes most of
//! the 8-bit output range whenever one hot or cold object stretches the
//! global extrema. This crate instead builds two full-resolution scalar
//! fields, a per-pixel lower and upper bound, and rescales every pixel
//! between them:
//!
//! 1. pool per-patch minima and maxima into two coarse grids;
//! 2. clamp isolated extreme cells toward their neighborhood average
//!    (local extrema suppression);
//! 3. spread information between neighboring cells with iterated min/max
//!    message passing;
//! 4. upsample both grids bilinearly and rescale the frame between them,
//!    optionally followed by gamma correction and CLAHE.
//!
//! Classical global baselines (min/max, percentile clipping, 30-bin
//! histogram equalization, multi-scale retinex, a simplified conditional
//! Gaussian filter), no-reference quality metrics, PNG/TIFF I/O, and a
//! per-phase timing harness round out the toolkit.
//!
//! Grid and field math is generic over the scalar type via [`Real`]
//! (`f32` or `f64`); the crate-root aliases fix the default `f64`.
//!
//! ```
//! use thermofield::{fieldscale, FieldscaleParams, RawFrame, TemporalState};
//!
//! let frame = RawFrame::from_fn(64, 48, |x, y| (3000 + 7 * x + 11 * y) as u16).unwrap();
//! let (image, _state): (_, TemporalState) =
//!     fieldscale(&frame, &FieldscaleParams::default(), None).unwrap();
//! assert_eq!((image.width(), image.height()), (64, 48));
//! ```

pub mod baselines;
pub mod bench;
pub mod blur;
pub mod enhance;
mod error;
pub mod field;
pub mod frame;
pub mod grid;
pub mod io;
pub mod iqa;
pub mod params;
mod real;
pub mod rescale;

pub use error::{Error, Result};
pub use field::{build_fields, upsample_bilinear};
pub use frame::{Image8, RawFrame};
pub use grid::Role;
pub use params::{default_les_distance, FieldscaleParams, LesTarget};
pub use real::Real;
pub use rescale::{fieldscale, fieldscale_with_enhancer, rescale_with_fields, smooth_fields};

/// Coarse pooled grid with the default `f64` scalar.
pub type MinMaxGrid = grid::MinMaxGrid<f64>;
/// Full-resolution scalar field with the default `f64` scalar.
pub type ScalarField = field::ScalarField<f64>;
/// Temporal smoothing state with the default `f64` scalar.
pub type TemporalState = rescale::TemporalState<f64>;
