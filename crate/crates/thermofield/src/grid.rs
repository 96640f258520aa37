//! Coarse min/max grids: patch pooling, local extrema suppression, and
//! message passing.
//!
//! The frame is partitioned into rectangular patches and the per-patch
//! extrema form two small grids, one per role. Pooling constrains the
//! influence of an extreme object to its own patch and decouples the
//! processing of hot and cold regions. The max grid is then cleaned of
//! isolated extreme cells by clamping them toward their neighborhood
//! average (suppression), and both grids are smoothed by iterated neighbor
//! exchange (message passing) before being upsampled back to frame
//! resolution.
//!
//! All updates are synchronous: every output cell is computed from the
//! input grid, so results do not depend on traversal order.

use crate::error::{Error, Result};
use crate::frame::RawFrame;
use crate::real::{real, Real};

/// Which extremum a grid or field carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Min,
    Max,
}

/// Floor-based partition of `len` indices into `cells` contiguous spans.
///
/// Span `i` covers `[i*len/cells, (i+1)*len/cells)`. Remainder indices are
/// spread evenly and every index belongs to exactly one span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchPartition {
    bounds: Vec<usize>,
}

impl PatchPartition {
    /// Requires `1 <= cells <= len`.
    pub fn new(len: usize, cells: usize) -> Self {
        assert!(cells >= 1 && cells <= len, "need 1 <= cells <= len");
        let bounds = (0..=cells).map(|i| i * len / cells).collect();
        Self { bounds }
    }

    pub fn cells(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Half-open index span of cell `i`.
    pub fn span(&self, i: usize) -> (usize, usize) {
        (self.bounds[i], self.bounds[i + 1])
    }

    /// Sample position of cell `i`: the center of its span, in index units.
    pub fn center(&self, i: usize) -> f64 {
        let (lo, hi) = self.span(i);
        (lo + hi - 1) as f64 * 0.5
    }

    /// Cell containing index `pos`.
    pub fn index_of(&self, pos: usize) -> usize {
        assert!(pos < *self.bounds.last().unwrap(), "position out of range");
        self.bounds.partition_point(|&b| b <= pos) - 1
    }
}

/// Coarse grid of pooled scalars, one value per patch.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxGrid<T> {
    rows: usize,
    cols: usize,
    role: Role,
    values: Vec<T>,
}

impl<T: Real> MinMaxGrid<T> {
    pub fn from_values(rows: usize, cols: usize, role: Role, values: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter(format!(
                "grid dimensions must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::Parameter(format!(
                "grid value count {} does not match {rows}x{cols}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("grid values must be finite".into()));
        }
        Ok(Self {
            rows,
            cols,
            role,
            values,
        })
    }

    pub fn constant(rows: usize, cols: usize, role: Role, value: T) -> Self {
        Self::from_values(rows, cols, role, vec![value; rows * cols])
            .expect("constant grid is valid")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn role(&self) -> Role {
        self.role
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.cols + col]
    }
}

/// Pools per-patch minima and maxima of `frame` into a pair of
/// `grid_rows x grid_cols` grids.
///
/// The patch layout is the floor-based [`PatchPartition`] along each axis.
pub fn pool_minmax<T: Real>(
    frame: &RawFrame,
    grid_rows: usize,
    grid_cols: usize,
) -> Result<(MinMaxGrid<T>, MinMaxGrid<T>)> {
    if grid_rows == 0 || grid_cols == 0 {
        return Err(Error::Parameter("grid dimensions must be at least 1".into()));
    }
    if grid_rows > frame.height() || grid_cols > frame.width() {
        return Err(Error::Parameter(format!(
            "grid {}x{} exceeds frame {}x{}",
            grid_rows,
            grid_cols,
            frame.height(),
            frame.width()
        )));
    }
    let rows_part = PatchPartition::new(frame.height(), grid_rows);
    let cols_part = PatchPartition::new(frame.width(), grid_cols);

    let mut mins = Vec::with_capacity(grid_rows * grid_cols);
    let mut maxs = Vec::with_capacity(grid_rows * grid_cols);
    for r in 0..grid_rows {
        let (y0, y1) = rows_part.span(r);
        for c in 0..grid_cols {
            let (x0, x1) = cols_part.span(c);
            let mut lo = u16::MAX;
            let mut hi = u16::MIN;
            for y in y0..y1 {
                for &v in &frame.row(y)[x0..x1] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            mins.push(T::from_u16(lo).unwrap());
            maxs.push(T::from_u16(hi).unwrap());
        }
    }
    Ok((
        MinMaxGrid::from_values(grid_rows, grid_cols, Role::Min, mins)?,
        MinMaxGrid::from_values(grid_rows, grid_cols, Role::Max, maxs)?,
    ))
}

/// Mean value of the cells within Chebyshev distance `distance` of
/// `(row, col)`, excluding the cell itself and anything out of bounds.
///
/// Border cells therefore average over fewer neighbors. A cell with no
/// in-bounds neighbor (only possible on a 1x1 grid) returns its own value,
/// which makes suppression and message passing no-ops there.
pub fn neighborhood_average<T: Real>(
    grid: &MinMaxGrid<T>,
    row: usize,
    col: usize,
    distance: usize,
) -> T {
    assert!(row < grid.rows() && col < grid.cols(), "cell out of range");
    assert!(distance >= 1, "distance must be at least 1");
    let r0 = row.saturating_sub(distance);
    let r1 = (row + distance).min(grid.rows() - 1);
    let c0 = col.saturating_sub(distance);
    let c1 = (col + distance).min(grid.cols() - 1);

    let mut sum = T::zero();
    let mut count = 0usize;
    for r in r0..=r1 {
        for c in c0..=c1 {
            if r == row && c == col {
                continue;
            }
            sum = sum + grid.get(r, c);
            count += 1;
        }
    }
    if count == 0 {
        grid.get(row, col)
    } else {
        sum / real::<T>(count as f64)
    }
}

/// Local extrema suppression: clamps every cell into the band
/// `[avg - threshold, avg + threshold]` around its neighborhood average.
///
/// Averages are taken from the input grid, so all cells update
/// simultaneously and the result is independent of traversal order.
pub fn les<T: Real>(grid: &MinMaxGrid<T>, threshold: T, distance: usize) -> MinMaxGrid<T> {
    assert!(threshold >= T::zero(), "threshold must be >= 0");
    assert!(distance >= 1, "distance must be at least 1");
    let mut out = grid.clone();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let v = grid.get(r, c);
            let avg = neighborhood_average(grid, r, c, distance);
            let lo = avg - threshold;
            let hi = avg + threshold;
            out.values[r * grid.cols() + c] = if v < lo {
                lo
            } else if v > hi {
                hi
            } else {
                v
            };
        }
    }
    out
}

/// One synchronous message-passing step with a custom aggregation radius.
///
/// Every cell aggregates its neighborhood average from the input grid and
/// updates with `min(cell, avg)` on a min grid or `max(cell, avg)` on a
/// max grid, so min cells only ever decrease and max cells only increase.
pub fn mp_step_with<T: Real>(grid: &MinMaxGrid<T>, distance: usize) -> MinMaxGrid<T> {
    assert!(distance >= 1, "distance must be at least 1");
    let mut out = grid.clone();
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let v = grid.get(r, c);
            let agg = neighborhood_average(grid, r, c, distance);
            out.values[r * grid.cols() + c] = match grid.role() {
                Role::Min => v.min(agg),
                Role::Max => v.max(agg),
            };
        }
    }
    out
}

/// One message-passing step over the 8-neighborhood.
pub fn mp_step<T: Real>(grid: &MinMaxGrid<T>) -> MinMaxGrid<T> {
    mp_step_with(grid, 1)
}

/// `iterations` message-passing steps with a custom aggregation radius.
pub fn mp_with<T: Real>(grid: &MinMaxGrid<T>, iterations: usize, distance: usize) -> MinMaxGrid<T> {
    let mut g = grid.clone();
    for _ in 0..iterations {
        g = mp_step_with(&g, distance);
    }
    g
}

/// `iterations` message-passing steps over the 8-neighborhood;
/// zero iterations returns the input unchanged.
pub fn mp<T: Real>(grid: &MinMaxGrid<T>, iterations: usize) -> MinMaxGrid<T> {
    mp_with(grid, iterations, 1)
}
