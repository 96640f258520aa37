//! Truncated Gaussian blur with edge replication.

/// Separable Gaussian blur of a row-major `f64` image.
///
/// The kernel is truncated at radius `ceil(3 * sigma)` and normalized to
/// unit sum; out-of-bounds taps read the nearest edge sample. With
/// replicate borders the separable row/column passes equal the full 2D
/// kernel, so this is the reference semantics, not an approximation.
pub fn gaussian_blur(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    assert_eq!(data.len(), width * height);
    let kernel = gaussian_kernel(sigma);
    let tmp = convolve_rows(data, width, height, &kernel);
    let transposed = transpose(&tmp, width, height);
    let blurred = convolve_rows(&transposed, height, width, &kernel);
    transpose(&blurred, height, width)
}

/// Normalized 1D kernel of length `2 * ceil(3 sigma) + 1`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }
    kernel
}

fn convolve_rows(data: &[f64], width: usize, height: usize, kernel: &[f64]) -> Vec<f64> {
    let radius = (kernel.len() / 2) as i64;
    let mut out = Vec::with_capacity(data.len());
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width as i64 {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let sx = (x + k as i64 - radius).clamp(0, width as i64 - 1) as usize;
                acc += w * row[sx];
            }
            out.push(acc);
        }
    }
    out
}

fn transpose(data: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = data[y * width + x];
        }
    }
    out
}
