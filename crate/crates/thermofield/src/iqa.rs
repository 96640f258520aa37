//! No-reference image quality metrics and batch aggregation.
//!
//! Two metrics, both on 8-bit grayscale images:
//!
//! * mean gradient: average central-difference gradient magnitude over
//!   interior pixels, normalized by 255, so 0 means flat;
//! * entropy: Shannon entropy of the 256-bin intensity histogram in bits,
//!   divided by 8, so 1 means a perfectly uniform histogram.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frame::Image8;

/// Mean gradient magnitude, in `[0, ~1.4]`, higher meaning more edges.
///
/// Central differences need both neighbors, so boundary pixels are
/// excluded; an image with no interior (2 pixels on a side) scores 0.
pub fn mean_gradient(img: &Image8) -> Result<f64> {
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::Parameter(format!(
            "gradient needs at least 2x2 pixels, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    if img.width() < 3 || img.height() < 3 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for y in 1..img.height() - 1 {
        for x in 1..img.width() - 1 {
            let gx = (img.get(x + 1, y) as f64 - img.get(x - 1, y) as f64) / 2.0;
            let gy = (img.get(x, y + 1) as f64 - img.get(x, y - 1) as f64) / 2.0;
            sum += (gx * gx + gy * gy).sqrt() / 255.0;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// Normalized histogram entropy in `[0, 1]`.
pub fn entropy(img: &Image8) -> f64 {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    let total = img.data().len() as f64;
    let mut bits = 0.0;
    for &h in &hist {
        if h > 0 {
            let p = h as f64 / total;
            bits -= p * p.log2();
        }
    }
    bits / 8.0
}

/// Metrics for one image.
#[derive(Clone, Debug, PartialEq)]
pub struct IqaReport {
    pub image_id: String,
    pub gradient: f64,
    pub entropy: f64,
}

/// Per-image rows plus batch aggregates. Files that failed to load or
/// measure are collected separately and excluded from the aggregates.
#[derive(Clone, Debug, Default)]
pub struct IqaBatch {
    pub rows: Vec<IqaReport>,
    pub failures: Vec<(PathBuf, String)>,
}

impl IqaBatch {
    /// (mean, population std-dev) of the gradient column.
    pub fn gradient_stats(&self) -> (f64, f64) {
        stats(self.rows.iter().map(|r| r.gradient))
    }

    /// (mean, population std-dev) of the entropy column.
    pub fn entropy_stats(&self) -> (f64, f64) {
        stats(self.rows.iter().map(|r| r.entropy))
    }
}

fn stats(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Measures every image in `paths`, in order. Unreadable or degenerate
/// files are recorded as failures and the batch continues; an empty input
/// list is an error.
pub fn iqa_batch(paths: &[PathBuf]) -> Result<IqaBatch> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("iqa batch needs at least one image".into()));
    }
    let mut batch = IqaBatch::default();
    for path in paths {
        match measure_one(path) {
            Ok(report) => batch.rows.push(report),
            Err(e) => batch.failures.push((path.clone(), e.to_string())),
        }
    }
    Ok(batch)
}

fn measure_one(path: &Path) -> Result<IqaReport> {
    let img = crate::io::load_image8(path)?;
    Ok(IqaReport {
        image_id: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
        gradient: mean_gradient(&img)?,
        entropy: entropy(&img),
    })
}

/// CSV emission: `image_id,gradient,entropy` rows in input order, then an
/// aggregate block with `mean` and `std` rows. `header` toggles the
/// leading column-name row.
pub fn write_iqa_csv<W: Write>(writer: W, batch: &IqaBatch, header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    let io_err = |e: csv::Error| Error::Parameter(format!("csv write failed: {e}"));
    if header {
        w.write_record(["image_id", "gradient", "entropy"]).map_err(io_err)?;
    }
    for row in &batch.rows {
        w.write_record([
            row.image_id.as_str(),
            &format!("{:.6}", row.gradient),
            &format!("{:.6}", row.entropy),
        ])
        .map_err(io_err)?;
    }
    let (gm, gs) = batch.gradient_stats();
    let (em, es) = batch.entropy_stats();
    w.write_record(["mean", &format!("{gm:.6}"), &format!("{em:.6}")])
        .map_err(io_err)?;
    w.write_record(["std", &format!("{gs:.6}"), &format!("{es:.6}")])
        .map_err(io_err)?;
    w.flush()
        .map_err(|e| Error::Parameter(format!("csv flush failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn transposed(img: &Image8) -> Image8 {
        Image8::from_fn(img.height(), img.width(), |x, y| img.get(y, x)).unwrap()
    }

    fn hflipped(img: &Image8) -> Image8 {
        Image8::from_fn(img.width(), img.height(), |x, y| {
            img.get(img.width() - 1 - x, y)
        })
        .unwrap()
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let img = Image8::constant(9, 9, 180).unwrap();
        assert_eq!(mean_gradient(&img).unwrap(), 0.0);
    }

    #[test]
    fn gradient_of_ramp_is_step_over_255() {
        let step = 3u8;
        let img = Image8::from_fn(20, 10, |x, _| (x as u8) * step).unwrap();
        let g = mean_gradient(&img).unwrap();
        assert!((g - step as f64 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_blind_to_checkerboard() {
        // central differences skip the immediate neighbor, so a pixel-level
        // checkerboard reads as flat
        let img = Image8::from_fn(4, 4, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap();
        assert_eq!(mean_gradient(&img).unwrap(), 0.0);
    }

    #[test]
    fn gradient_dims() {
        assert!(mean_gradient(&Image8::constant(1, 5, 0).unwrap()).is_err());
        assert!(mean_gradient(&Image8::constant(5, 1, 0).unwrap()).is_err());
        // legal but has no interior pixels
        assert_eq!(mean_gradient(&Image8::constant(2, 2, 9).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn entropy_extremes() {
        let img = Image8::constant(16, 16, 40).unwrap();
        assert_eq!(entropy(&img), 0.0);

        let img = Image8::from_fn(16, 16, |x, y| (y * 16 + x) as u8).unwrap();
        assert_eq!(entropy(&img), 1.0);
    }

    #[test]
    fn entropy_two_values_even_split() {
        let img = Image8::from_fn(8, 8, |x, _| if x < 4 { 10 } else { 200 }).unwrap();
        assert_eq!(entropy(&img), 0.125);
    }

    #[test]
    fn metrics_invariant_to_flips_and_transpose() {
        let img = Image8::from_fn(12, 9, |x, y| ((x * 31 + y * 57) % 251) as u8).unwrap();
        let g = mean_gradient(&img).unwrap();
        let e = entropy(&img);
        for variant in [transposed(&img), hflipped(&img)] {
            assert!((mean_gradient(&variant).unwrap() - g).abs() < 1e-12);
            assert_eq!(entropy(&variant), e);
        }
    }

    #[test]
    fn batch_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        crate::io::save_image8(&Image8::constant(8, 8, 10).unwrap(), &a).unwrap();
        crate::io::save_image8(
            &Image8::from_fn(8, 8, |x, _| if x < 4 { 0 } else { 255 }).unwrap(),
            &b,
        )
        .unwrap();

        let batch = iqa_batch(std::slice::from_ref(&a)).unwrap();
        assert_eq!(batch.rows.len(), 1);
        let (gm, gs) = batch.gradient_stats();
        assert_eq!((gm, gs), (batch.rows[0].gradient, 0.0));

        let batch = iqa_batch(&[a, b]).unwrap();
        let (em, _) = batch.entropy_stats();
        let manual = (batch.rows[0].entropy + batch.rows[1].entropy) / 2.0;
        assert_eq!(em, manual);
    }

    #[test]
    fn batch_two_constant_images_are_all_zero() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["x.png", "y.png"] {
            crate::io::save_image8(&Image8::constant(6, 6, 77).unwrap(), dir.path().join(name))
                .unwrap();
        }
        let batch = iqa_batch(&[dir.path().join("x.png"), dir.path().join("y.png")]).unwrap();
        assert_eq!(batch.gradient_stats(), (0.0, 0.0));
        assert_eq!(batch.entropy_stats(), (0.0, 0.0));
    }

    #[test]
    fn batch_records_failures_and_continues() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.png");
        crate::io::save_image8(&Image8::constant(8, 8, 1).unwrap(), &good).unwrap();
        let missing = dir.path().join("missing.png");
        let batch = iqa_batch(&[missing.clone(), good]).unwrap();
        assert_eq!(batch.rows.len(), 1);
        assert_eq!(batch.failures.len(), 1);
        assert_eq!(batch.failures[0].0, missing);
    }

    #[test]
    fn batch_rejects_empty_input() {
        assert!(matches!(iqa_batch(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn csv_shape() {
        let batch = IqaBatch {
            rows: vec![IqaReport {
                image_id: "one.png".into(),
                gradient: 0.25,
                entropy: 0.5,
            }],
            failures: vec![],
        };
        let mut buf = Vec::new();
        write_iqa_csv(&mut buf, &batch, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "image_id,gradient,entropy");
        assert_eq!(lines[1], "one.png,0.250000,0.500000");
        assert_eq!(lines[2], "mean,0.250000,0.500000");
        assert_eq!(lines[3], "std,0.000000,0.000000");

        let mut buf = Vec::new();
        write_iqa_csv(&mut buf, &batch, false).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("one.png"));
    }

    proptest! {
        #[test]
        fn entropy_in_unit_interval_and_permutation_invariant(
            vals in proptest::collection::vec(any::<u8>(), 4..128),
            seed in any::<u64>(),
        ) {
            let img = Image8::new(vals.len(), 1, vals.clone()).unwrap();
            let e = entropy(&img);
            prop_assert!((0.0..=1.0).contains(&e));

            // entropy depends only on the histogram, not pixel placement
            let mut shuffled = vals.clone();
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                shuffled.swap(i, j);
            }
            let img2 = Image8::new(shuffled.len(), 1, shuffled).unwrap();
            prop_assert_eq!(entropy(&img2), e);
        }
    }
}
