//! Post-rescale contrast enhancement: gamma correction and CLAHE.

use crate::error::{Error, Result};
use crate::field::axis_table;
use crate::frame::Image8;
use crate::grid::PatchPartition;

/// 256-entry gamma lookup table: `round(255 * (i/255)^(1/gamma))`.
///
/// The exponent is `1/gamma`, so gamma above 1 brightens. A darkening
/// curve with the opposite convention is `gamma_table(1.0 / g)`.
pub fn gamma_table(gamma: f64) -> Result<[u8; 256]> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::Parameter(format!("gamma must be > 0, got {gamma}")));
    }
    let exponent = 1.0 / gamma;
    let mut table = [0u8; 256];
    for (i, slot) in table.iter_mut().enumerate() {
        let v = 255.0 * (i as f64 / 255.0).powf(exponent);
        *slot = v.round().clamp(0.0, 255.0) as u8;
    }
    Ok(table)
}

/// Applies the gamma curve through a precomputed table.
pub fn gamma_correct(img: &Image8, gamma: f64) -> Result<Image8> {
    let table = gamma_table(gamma)?;
    let data = img.data().iter().map(|&v| table[v as usize]).collect();
    Image8::new(img.width(), img.height(), data)
}

/// Contrast-limited adaptive histogram equalization.
///
/// The image is partitioned into `tiles_r x tiles_c` tiles (same floor
/// partition as grid pooling). Each tile gets a 256-bin histogram clipped
/// at `clip_limit * tile_pixels / 256` with the excess redistributed
/// uniformly, and an equalization mapping from its cumulative histogram.
/// Every pixel then blends the mappings of the four surrounding tile
/// centers bilinearly; edge tiles replicate outward.
pub fn clahe(img: &Image8, clip_limit: f64, tiles_r: usize, tiles_c: usize) -> Result<Image8> {
    if clip_limit.is_nan() || clip_limit < 1.0 {
        return Err(Error::Parameter(format!(
            "clip limit must be >= 1, got {clip_limit}"
        )));
    }
    if tiles_r == 0 || tiles_c == 0 {
        return Err(Error::Parameter("tile counts must be at least 1".into()));
    }
    if tiles_r > img.height() || tiles_c > img.width() {
        return Err(Error::Parameter(format!(
            "tile grid {tiles_r}x{tiles_c} exceeds image {}x{}",
            img.height(),
            img.width()
        )));
    }

    let rows = PatchPartition::new(img.height(), tiles_r);
    let cols = PatchPartition::new(img.width(), tiles_c);

    // Unrounded per-tile mappings; quantization happens once, after blending.
    let mut luts: Vec<[f64; 256]> = Vec::with_capacity(tiles_r * tiles_c);
    for tr in 0..tiles_r {
        let (y0, y1) = rows.span(tr);
        for tc in 0..tiles_c {
            let (x0, x1) = cols.span(tc);
            let mut hist = [0u32; 256];
            for y in y0..y1 {
                for &v in &img.row(y)[x0..x1] {
                    hist[v as usize] += 1;
                }
            }
            let tile_pixels = ((y1 - y0) * (x1 - x0)) as u32;
            clip_histogram(&mut hist, clip_limit, tile_pixels);
            luts.push(equalization_lut(&hist, tile_pixels));
        }
    }

    let ys = axis_table::<f64>(img.height(), &rows);
    let xs = axis_table::<f64>(img.width(), &cols);
    let mut data = Vec::with_capacity(img.width() * img.height());
    for (y, &(r0, r1, wy)) in ys.iter().enumerate() {
        for (x, &(c0, c1, wx)) in xs.iter().enumerate() {
            let v = img.get(x, y) as usize;
            let top = luts[r0 * tiles_c + c0][v] * (1.0 - wx) + luts[r0 * tiles_c + c1][v] * wx;
            let bottom = luts[r1 * tiles_c + c0][v] * (1.0 - wx) + luts[r1 * tiles_c + c1][v] * wx;
            let blended = top * (1.0 - wy) + bottom * wy;
            data.push(blended.round().clamp(0.0, 255.0) as u8);
        }
    }
    Image8::new(img.width(), img.height(), data)
}

/// Clips bins at `clip_limit * tile_pixels / 256` (at least 1) and spreads
/// the clipped mass uniformly: an equal share to every bin, remainder one
/// count at a time at evenly stepped bins.
fn clip_histogram(hist: &mut [u32; 256], clip_limit: f64, tile_pixels: u32) {
    let limit = ((clip_limit * tile_pixels as f64 / 256.0) as u32).max(1);
    let mut clipped: u32 = 0;
    for count in hist.iter_mut() {
        if *count > limit {
            clipped += *count - limit;
            *count = limit;
        }
    }
    if clipped == 0 {
        return;
    }
    let share = clipped / 256;
    if share > 0 {
        for count in hist.iter_mut() {
            *count += share;
        }
    }
    let mut residual = (clipped % 256) as usize;
    if let Some(step) = 256usize.checked_div(residual) {
        let step = step.max(1);
        let mut i = 0;
        while residual > 0 && i < 256 {
            hist[i] += 1;
            i += step;
            residual -= 1;
        }
    }
}

/// Plain equalization mapping of one histogram: `255 * cdf`.
fn equalization_lut(hist: &[u32; 256], total: u32) -> [f64; 256] {
    let mut lut = [0.0f64; 256];
    let mut cum = 0u32;
    for (i, &h) in hist.iter().enumerate() {
        cum += h;
        lut[i] = 255.0 * cum as f64 / total as f64;
    }
    lut
}
