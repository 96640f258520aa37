//! Tunables for the field construction and rescaling pipeline.

use crate::error::{Error, Result};
use crate::frame::RawFrame;

/// Which pooled grids receive local extrema suppression.
///
/// Hot outliers concentrate in the max grid, so suppressing only that grid
/// is the default; the min grid can be included for scenes with extreme
/// cold spots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LesTarget {
    MaxOnly,
    Both,
    Neither,
}

/// All tunables for the pipeline.
///
/// `Default` matches the DEFAULT preset (8x8 grid, 7 message-passing
/// iterations, suppression threshold 100 on the max grid, gamma 1.5 and
/// CLAHE enabled); [`FieldscaleParams::fast`] gives the FAST preset.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldscaleParams {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Suppression threshold in raw intensity units.
    pub les_threshold: f64,
    /// Neighborhood radius (in cells, Chebyshev) for suppression.
    pub les_distance: usize,
    /// Number of message-passing iterations.
    pub mp_iterations: usize,
    /// Neighborhood radius for message passing. Fixed at 1 in practice.
    pub mp_distance: usize,
    pub apply_les_to: LesTarget,
    /// Gamma for post-rescale correction; the mapping raises to `1/gamma`,
    /// so values above 1 brighten and values below 1 darken.
    pub gamma: f64,
    /// Apply gamma correction and CLAHE after rescaling.
    pub enhance_enabled: bool,
    pub clahe_clip_limit: f64,
    pub clahe_tiles_rows: usize,
    pub clahe_tiles_cols: usize,
}

impl Default for FieldscaleParams {
    fn default() -> Self {
        Self {
            grid_rows: 8,
            grid_cols: 8,
            les_threshold: 100.0,
            les_distance: 2,
            mp_iterations: 7,
            mp_distance: 1,
            apply_les_to: LesTarget::MaxOnly,
            gamma: 1.5,
            enhance_enabled: true,
            clahe_clip_limit: 2.0,
            clahe_tiles_rows: 8,
            clahe_tiles_cols: 8,
        }
    }
}

impl FieldscaleParams {
    /// FAST preset: one message-passing iteration, suppression threshold 800.
    pub fn fast() -> Self {
        Self {
            mp_iterations: 1,
            les_threshold: 800.0,
            ..Self::default()
        }
    }

    /// Defaults with a custom grid; the suppression distance is rescaled
    /// with the grid via [`default_les_distance`].
    pub fn with_grid(grid_rows: usize, grid_cols: usize) -> Self {
        Self {
            grid_rows,
            grid_cols,
            les_distance: default_les_distance(grid_rows),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::Parameter("grid dimensions must be at least 1".into()));
        }
        if self.les_threshold.is_nan() || self.les_threshold < 0.0 {
            return Err(Error::Parameter(format!(
                "les_threshold must be >= 0, got {}",
                self.les_threshold
            )));
        }
        if self.les_distance == 0 {
            return Err(Error::Parameter("les_distance must be at least 1".into()));
        }
        if self.mp_distance == 0 {
            return Err(Error::Parameter("mp_distance must be at least 1".into()));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(Error::Parameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.clahe_clip_limit.is_nan() || self.clahe_clip_limit < 1.0 {
            return Err(Error::Parameter(format!(
                "clahe_clip_limit must be >= 1, got {}",
                self.clahe_clip_limit
            )));
        }
        if self.clahe_tiles_rows == 0 || self.clahe_tiles_cols == 0 {
            return Err(Error::Parameter("CLAHE tile counts must be at least 1".into()));
        }
        Ok(())
    }

    /// Validation that also checks the grid fits inside `frame`.
    pub fn validate_for(&self, frame: &RawFrame) -> Result<()> {
        self.validate()?;
        if self.grid_rows > frame.height() || self.grid_cols > frame.width() {
            return Err(Error::Parameter(format!(
                "grid {}x{} exceeds frame {}x{}",
                self.grid_rows,
                self.grid_cols,
                frame.height(),
                frame.width()
            )));
        }
        Ok(())
    }
}

/// Default suppression distance for a given grid size: 2 for 8 rows,
/// scaled proportionally otherwise, never below 1.
pub fn default_les_distance(grid_rows: usize) -> usize {
    ((grid_rows as f64 / 4.0).round() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_les_distance_scales_with_grid() {
        assert_eq!(default_les_distance(8), 2);
        assert_eq!(default_les_distance(4), 1);
        assert_eq!(default_les_distance(1), 1);
        assert_eq!(default_les_distance(16), 4);
    }

    #[test]
    fn fast_preset_overrides() {
        let p = FieldscaleParams::fast();
        assert_eq!(p.mp_iterations, 1);
        assert_eq!(p.les_threshold, 800.0);
        assert_eq!(p.grid_rows, 8);
    }

    #[test]
    fn validate_for_checks_grid_fit() {
        let frame = RawFrame::constant(4, 4, 0).unwrap();
        let p = FieldscaleParams::default();
        assert!(p.validate_for(&frame).is_err());
        let p = FieldscaleParams::with_grid(4, 4);
        assert!(p.validate_for(&frame).is_ok());
    }

    #[test]
    fn validate_rejects_bad_values() {
        let p = FieldscaleParams {
            gamma: 0.0,
            ..FieldscaleParams::default()
        };
        assert!(p.validate().is_err());
        let p = FieldscaleParams {
            les_threshold: -1.0,
            ..FieldscaleParams::default()
        };
        assert!(p.validate().is_err());
        let p = FieldscaleParams {
            clahe_clip_limit: 0.5,
            ..FieldscaleParams::default()
        };
        assert!(p.validate().is_err());
    }
}
