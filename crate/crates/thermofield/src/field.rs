//! Full-resolution scalar fields and their construction from a RAW frame.
//!
//! A field assigns every pixel a lower (min role) or upper (max role)
//! rescale bound. [`build_fields`] runs the whole construction: pool the
//! frame into coarse grids, suppress local extrema, run message passing,
//! and upsample both grids back to frame resolution with bilinear
//! interpolation anchored at patch centers.

use crate::error::Result;
use crate::frame::RawFrame;
use crate::grid::{les, mp_with, pool_minmax, MinMaxGrid, PatchPartition, Role};
use crate::params::{FieldscaleParams, LesTarget};
use crate::real::{real, Real};

/// Per-pixel rescale bound with the same dimensions as the source frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    width: usize,
    height: usize,
    role: Role,
    data: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(width: usize, height: usize, role: Role, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(crate::error::Error::Parameter(format!(
                "field data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(crate::error::Error::Parameter(
                "field values must be finite".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            role,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, role: Role, value: T) -> Self {
        Self::new(width, height, role, vec![value; width * height]).expect("constant field")
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn role(&self) -> Role {
        self.role
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// (min, max) over all field values.
    pub fn value_range(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Bracketing sample cells and right-hand weight for one axis position.
///
/// Positions at or outside the outer patch centers clamp to the edge
/// sample with weight zero.
pub(crate) fn axis_weight(part: &PatchPartition, pos: f64) -> (usize, usize, f64) {
    let n = part.cells();
    if n == 1 || pos <= part.center(0) {
        return (0, 0, 0.0);
    }
    if pos >= part.center(n - 1) {
        return (n - 1, n - 1, 0.0);
    }
    let mut seg = 0;
    while pos >= part.center(seg + 1) {
        seg += 1;
    }
    let c0 = part.center(seg);
    let c1 = part.center(seg + 1);
    (seg, seg + 1, (pos - c0) / (c1 - c0))
}

pub(crate) fn axis_table<T: Real>(len: usize, part: &PatchPartition) -> Vec<(usize, usize, T)> {
    (0..len)
        .map(|p| {
            let (a, b, w) = axis_weight(part, p as f64);
            (a, b, real::<T>(w))
        })
        .collect()
}

/// Evaluates the upsampling interpolant at fractional pixel coordinates.
///
/// `width`/`height` fix the patch layout the grid was pooled with. Exposed
/// for inspection and tests; the per-pixel upsampling uses the same
/// weights at integer positions.
pub fn interpolate_at<T: Real>(
    grid: &MinMaxGrid<T>,
    width: usize,
    height: usize,
    x: f64,
    y: f64,
) -> T {
    let rows = PatchPartition::new(height, grid.rows());
    let cols = PatchPartition::new(width, grid.cols());
    let (r0, r1, wy) = axis_weight(&rows, y);
    let (c0, c1, wx) = axis_weight(&cols, x);
    let wx = real::<T>(wx);
    let wy = real::<T>(wy);
    let one = T::one();
    let top = grid.get(r0, c0) * (one - wx) + grid.get(r0, c1) * wx;
    let bottom = grid.get(r1, c0) * (one - wx) + grid.get(r1, c1) * wx;
    top * (one - wy) + bottom * wy
}

/// Upsamples a coarse grid to `width x height` by bilinear interpolation
/// between patch-center samples, replicating edge samples beyond the
/// outermost centers.
pub fn upsample_bilinear<T: Real>(
    grid: &MinMaxGrid<T>,
    width: usize,
    height: usize,
) -> ScalarField<T> {
    assert!(
        width >= grid.cols() && height >= grid.rows(),
        "target must be at least the grid size"
    );
    let rows = PatchPartition::new(height, grid.rows());
    let cols = PatchPartition::new(width, grid.cols());
    let ys = axis_table::<T>(height, &rows);
    let xs = axis_table::<T>(width, &cols);

    let one = T::one();
    let mut data = Vec::with_capacity(width * height);
    for &(r0, r1, wy) in &ys {
        for &(c0, c1, wx) in &xs {
            let top = grid.get(r0, c0) * (one - wx) + grid.get(r0, c1) * wx;
            let bottom = grid.get(r1, c0) * (one - wx) + grid.get(r1, c1) * wx;
            data.push(top * (one - wy) + bottom * wy);
        }
    }
    ScalarField::new(width, height, grid.role(), data).expect("upsampled field is valid")
}

/// Raises the max field wherever it fails to exceed the min field by at
/// least one intensity unit, keeping the rescale denominator positive.
pub(crate) fn enforce_separation<T: Real>(min_field: &ScalarField<T>, max_field: &mut ScalarField<T>) {
    let one = T::one();
    for (hi, &lo) in max_field.data_mut().iter_mut().zip(min_field.data()) {
        let floor = lo + one;
        if *hi < floor {
            *hi = floor;
        }
    }
}

/// Builds the min and max scalar fields for `frame`.
///
/// Pipeline: patch pooling, local extrema suppression on the grids chosen
/// by `params.apply_les_to`, message passing on both grids, bilinear
/// upsampling, then max-field separation enforcement. Suppression can drag
/// a hot cell's max below the surrounding min, so after upsampling the max
/// field is raised to at least `min + 1` everywhere.
pub fn build_fields<T: Real>(
    frame: &RawFrame,
    params: &FieldscaleParams,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    params.validate_for(frame)?;
    let (mut grid_min, mut grid_max) =
        pool_minmax::<T>(frame, params.grid_rows, params.grid_cols)?;

    let threshold = real::<T>(params.les_threshold);
    match params.apply_les_to {
        LesTarget::MaxOnly => {
            grid_max = les(&grid_max, threshold, params.les_distance);
        }
        LesTarget::Both => {
            grid_min = les(&grid_min, threshold, params.les_distance);
            grid_max = les(&grid_max, threshold, params.les_distance);
        }
        LesTarget::Neither => {}
    }

    grid_min = mp_with(&grid_min, params.mp_iterations, params.mp_distance);
    grid_max = mp_with(&grid_max, params.mp_iterations, params.mp_distance);

    let field_min = upsample_bilinear(&grid_min, frame.width(), frame.height());
    let mut field_max = upsample_bilinear(&grid_max, frame.width(), frame.height());
    enforce_separation(&field_min, &mut field_max);
    Ok((field_min, field_max))
}
