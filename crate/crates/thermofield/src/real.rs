use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used for grid and field math: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Narrowing conversion from `f64`, for constants and precomputed weights.
#[inline]
pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 converts to any Real")
}
