//! Loading RAW 16-bit frames, writing 8-bit outputs, dataset enumeration,
//! and field dump files.
//!
//! RAW frames are 16-bit single-channel PNG or TIFF; pixel values pass
//! through unmodified (14-bit payloads are not shifted or masked). Outputs
//! are 8-bit grayscale PNG. Field dumps are a small binary format: the
//! magic `TFLD`, little-endian u32 width, height and role (0 = min,
//! 1 = max), then row-major little-endian f32 samples.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::frame::{Image8, RawFrame};
use crate::grid::Role;
use crate::real::{real, Real};

const FIELD_MAGIC: &[u8; 4] = b"TFLD";

fn color_shape(color: image::ColorType) -> (u8, u8) {
    use image::ColorType::*;
    match color {
        L8 => (1, 8),
        L16 => (1, 16),
        La8 => (2, 8),
        La16 => (2, 16),
        Rgb8 => (3, 8),
        Rgb16 => (3, 16),
        Rgba8 => (4, 8),
        Rgba16 => (4, 16),
        Rgb32F => (3, 32),
        Rgba32F => (4, 32),
        _ => (0, 0),
    }
}

fn open_image(path: &Path) -> Result<DynamicImage> {
    let reader = image::ImageReader::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    reader.decode().map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })
}

/// Decodes a 16-bit single-channel PNG or TIFF into a [`RawFrame`].
pub fn load_raw(path: impl AsRef<Path>) -> Result<RawFrame> {
    let path = path.as_ref();
    let img = open_image(path)?;
    match img {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            RawFrame::new(w as usize, h as usize, buf.into_raw())
        }
        other => {
            let (channels, bits) = color_shape(other.color());
            if channels != 1 {
                Err(Error::UnsupportedChannels {
                    path: path.to_path_buf(),
                    channels,
                })
            } else {
                Err(Error::UnsupportedBitDepth {
                    path: path.to_path_buf(),
                    bits,
                })
            }
        }
    }
}

/// Writes a frame as 16-bit grayscale PNG; loading it back is bit-exact.
pub fn save_raw16(frame: &RawFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
        frame.width() as u32,
        frame.height() as u32,
        frame.data().to_vec(),
    )
    .expect("frame buffer matches dimensions");
    buf.save(path).map_err(|source| Error::Encode {
        path: path.to_path_buf(),
        source,
    })
}

/// Decodes an 8-bit single-channel image.
pub fn load_image8(path: impl AsRef<Path>) -> Result<Image8> {
    let path = path.as_ref();
    let img = open_image(path)?;
    match img {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Image8::new(w as usize, h as usize, buf.into_raw())
        }
        other => {
            let (channels, bits) = color_shape(other.color());
            if channels != 1 {
                Err(Error::UnsupportedChannels {
                    path: path.to_path_buf(),
                    channels,
                })
            } else {
                Err(Error::UnsupportedBitDepth {
                    path: path.to_path_buf(),
                    bits,
                })
            }
        }
    }
}

/// Writes an 8-bit grayscale PNG; loading it back is bit-exact.
pub fn save_image8(img: &Image8, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().to_vec(),
    )
    .expect("image buffer matches dimensions");
    buf.save(path).map_err(|source| Error::Encode {
        path: path.to_path_buf(),
        source,
    })
}

/// One frame of a dataset sequence, identified before loading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetEntry {
    pub path: PathBuf,
    pub frame_index: usize,
}

impl DatasetEntry {
    pub fn load(&self) -> Result<RawFrame> {
        load_raw(&self.path)
    }
}

/// Enumerates files in `dir` whose names match `pattern` (glob syntax),
/// sorted lexicographically by file name for a stable, platform-independent
/// frame order. No matches yields an empty list, not an error.
pub fn scan_sequence(dir: impl AsRef<Path>, pattern: &str) -> Result<Vec<DatasetEntry>> {
    let dir = dir.as_ref();
    let matcher = glob::Pattern::new(pattern)
        .map_err(|e| Error::Parameter(format!("bad glob pattern {pattern:?}: {e}")))?;
    let entries = fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names: Vec<(String, PathBuf)> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if matcher.matches(&name) {
            names.push((name, path));
        }
    }
    names.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(frame_index, (_, path))| DatasetEntry { path, frame_index })
        .collect())
}

/// Writes a scalar field dump (`TFLD` header plus f32 samples).
pub fn write_field_dump<T: Real>(field: &ScalarField<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io_err)?;
    let mut header = Vec::with_capacity(16);
    header.extend_from_slice(FIELD_MAGIC);
    header.extend_from_slice(&(field.width() as u32).to_le_bytes());
    header.extend_from_slice(&(field.height() as u32).to_le_bytes());
    let role: u32 = match field.role() {
        Role::Min => 0,
        Role::Max => 1,
    };
    header.extend_from_slice(&role.to_le_bytes());
    file.write_all(&header).map_err(io_err)?;
    let mut body = Vec::with_capacity(field.data().len() * 4);
    for &v in field.data() {
        body.extend_from_slice(&(v.to_f32().expect("field value fits f32")).to_le_bytes());
    }
    file.write_all(&body).map_err(io_err)?;
    Ok(())
}

/// Reads a field dump back. Values widen losslessly from the stored f32.
pub fn read_field_dump<T: Real>(path: impl AsRef<Path>) -> Result<ScalarField<T>> {
    let path = path.as_ref();
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let bad = |reason: &str| Error::BadFieldDump {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(io_err)?
        .read_to_end(&mut bytes)
        .map_err(io_err)?;
    if bytes.len() < 16 || &bytes[0..4] != FIELD_MAGIC {
        return Err(bad("missing TFLD header"));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let width = u32_at(4) as usize;
    let height = u32_at(8) as usize;
    let role = match u32_at(12) {
        0 => Role::Min,
        1 => Role::Max,
        _ => return Err(bad("role must be 0 (min) or 1 (max)")),
    };
    let expected = 16 + width * height * 4;
    if bytes.len() != expected {
        return Err(bad(&format!(
            "payload is {} bytes, expected {expected} for {width}x{height}",
            bytes.len()
        )));
    }
    let data = bytes[16..]
        .chunks_exact(4)
        .map(|c| real::<T>(f32::from_le_bytes(c.try_into().unwrap()) as f64))
        .collect();
    ScalarField::new(width, height, role, data).map_err(|_| bad("non-finite samples"))
}

/// 8-bit visualization of a field, normalized by its own value range
/// (constant fields render black).
pub fn field_to_image8<T: Real>(field: &ScalarField<T>) -> Image8 {
    let (lo, hi) = field.value_range();
    let span = if hi > lo { hi - lo } else { T::one() };
    let full = real::<T>(255.0);
    let data = field
        .data()
        .iter()
        .map(|&v| crate::rescale::clamp_round_u8(full * (v - lo) / span))
        .collect();
    Image8::new(field.width(), field.height(), data).expect("field dims are valid")
}

/// Horizontal montage of equally tall panels with a thin white separator.
pub fn montage_horizontal(panels: &[&Image8]) -> Result<Image8> {
    let Some(first) = panels.first() else {
        return Err(Error::EmptyInput("montage needs at least one panel".into()));
    };
    let height = first.height();
    if panels.iter().any(|p| p.height() != height) {
        return Err(Error::Dimension("montage panels must share height".into()));
    }
    const GAP: usize = 2;
    let width: usize = panels.iter().map(|p| p.width()).sum::<usize>() + GAP * (panels.len() - 1);
    let mut data = vec![255u8; width * height];
    let mut x_off = 0;
    for panel in panels {
        for y in 0..height {
            let dst = y * width + x_off;
            data[dst..dst + panel.width()].copy_from_slice(panel.row(y));
        }
        x_off += panel.width() + GAP;
    }
    Image8::new(width, height, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn raw16_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.png");
        let frame = RawFrame::new(4, 4, (0..16).map(|i| (i * 4001) as u16).collect()).unwrap();
        save_raw16(&frame, &path).unwrap();
        let back = load_raw(&path).unwrap();
        assert_eq!(back, frame);
    }

    #[test]
    fn raw16_tiff_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pattern.tif");
        let frame = RawFrame::new(5, 3, (0..15).map(|i| (i * 3777) as u16).collect()).unwrap();
        save_raw16(&frame, &path).unwrap();
        let back = load_raw(&path).unwrap();
        assert_eq!(back, frame);
    }

    #[test]
    fn image8_round_trip_including_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        for (name, img) in [
            ("zeros.png", Image8::constant(6, 4, 0).unwrap()),
            ("one.png", Image8::constant(1, 1, 200).unwrap()),
            (
                "mix.png",
                Image8::from_fn(7, 5, |x, y| (x * 40 + y * 13) as u8).unwrap(),
            ),
        ] {
            let path = dir.path().join(name);
            save_image8(&img, &path).unwrap();
            assert_eq!(load_image8(&path).unwrap(), img);
        }
    }

    #[test]
    fn load_raw_rejects_8_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eight.png");
        save_image8(&Image8::constant(4, 4, 9).unwrap(), &path).unwrap();
        match load_raw(&path) {
            Err(Error::UnsupportedBitDepth { bits, .. }) => assert_eq!(bits, 8),
            other => panic!("expected bit depth error, got {other:?}"),
        }
    }

    #[test]
    fn load_raw_rejects_multichannel_16_bit_tiff() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb16.tif");
        let buf: ImageBuffer<Rgb<u16>, Vec<u16>> =
            ImageBuffer::from_fn(4, 4, |x, y| Rgb([x as u16, y as u16, 1000]));
        buf.save(&path).unwrap();
        match load_raw(&path) {
            Err(Error::UnsupportedChannels { channels, .. }) => assert_eq!(channels, 3),
            other => panic!("expected channel error, got {other:?}"),
        }
    }

    #[test]
    fn load_raw_missing_file() {
        assert!(matches!(
            load_raw("/nonexistent/frame.png"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn scan_sequence_orders_matches_only() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["0003.png", "0001.png", "0002.png", "notes.txt", "0004.tif"] {
            fs::write(dir.path().join(name), b"x").unwrap();
        }
        let entries = scan_sequence(dir.path(), "*.png").unwrap();
        let names: Vec<String> = entries
            .iter()
            .map(|e| e.path.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, ["0001.png", "0002.png", "0003.png"]);
        assert_eq!(
            entries.iter().map(|e| e.frame_index).collect::<Vec<_>>(),
            [0, 1, 2]
        );
    }

    #[test]
    fn scan_sequence_empty_dir_is_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        assert!(scan_sequence(dir.path(), "*.png").unwrap().is_empty());
    }

    #[test]
    fn field_dump_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("max.tfld");
        let field = ScalarField::new(
            3,
            2,
            Role::Max,
            vec![0.0f64, 1.5, -2.25, 1000.0, 4.0, 9.5],
        )
        .unwrap();
        write_field_dump(&field, &path).unwrap();

        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[0..4], b"TFLD");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 16 + 6 * 4);

        let back: ScalarField<f64> = read_field_dump(&path).unwrap();
        assert_eq!(back.role(), Role::Max);
        assert_eq!(back.data(), field.data());
    }

    #[test]
    fn field_dump_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tfld");
        fs::write(&path, b"nope").unwrap();
        assert!(matches!(
            read_field_dump::<f64>(&path),
            Err(Error::BadFieldDump { .. })
        ));
    }

    #[test]
    fn field_visualization_normalizes() {
        let field = ScalarField::new(2, 1, Role::Min, vec![100.0f64, 300.0]).unwrap();
        let img = field_to_image8(&field);
        assert_eq!(img.data(), &[0, 255]);
        let flat = ScalarField::constant(3, 2, Role::Min, 5.0f64);
        assert!(field_to_image8(&flat).data().iter().all(|&v| v == 0));
    }

    #[test]
    fn montage_concatenates_panels() {
        let a = Image8::constant(3, 2, 10).unwrap();
        let b = Image8::constant(4, 2, 20).unwrap();
        let m = montage_horizontal(&[&a, &b]).unwrap();
        assert_eq!(m.width(), 3 + 2 + 4);
        assert_eq!(m.height(), 2);
        assert_eq!(m.get(0, 0), 10);
        assert_eq!(m.get(3, 0), 255); // separator
        assert_eq!(m.get(5, 1), 20);

        let c = Image8::constant(4, 3, 0).unwrap();
        assert!(montage_horizontal(&[&a, &c]).is_err());
    }
}
