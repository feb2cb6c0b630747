//! Raster and edge-map files.
//!
//! Rasters are 8-bit PNG, PGM (P5) or PPM (P6) and map to `[0, 1]` as
//! `v / 255`. Edge maps use the EGMP layout:
//!
//! | offset | size | content                                   |
//! |-------:|-----:|-------------------------------------------|
//! | 0      | 4    | ASCII `EGMP`                              |
//! | 4      | 1    | version `0x01`                            |
//! | 5      | 4    | rows, `u32` little-endian                 |
//! | 9      | 4    | cols, `u32` little-endian                 |
//! | 13     | 4·rows·cols | `f32` little-endian values, row-major |

use std::fs;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::image::Image2D;

pub const EDGE_MAP_MAGIC: &[u8; 4] = b"EGMP";
pub const EDGE_MAP_VERSION: u8 = 0x01;
pub const EDGE_MAP_HEADER_LEN: usize = 13;

/// A decoded raster.
#[derive(Debug, Clone, PartialEq)]
pub enum Raster {
    Gray(Image2D),
    Rgb([Image2D; 3]),
}

impl Raster {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Raster::Gray(g) => g.shape(),
            Raster::Rgb(c) => c[0].shape(),
        }
    }

    pub fn channels(&self) -> Vec<&Image2D> {
        match self {
            Raster::Gray(g) => vec![g],
            Raster::Rgb(c) => c.iter().collect(),
        }
    }

    /// Mean of the channels for RGB, the image itself for gray.
    pub fn to_gray(&self) -> Image2D {
        match self {
            Raster::Gray(g) => g.clone(),
            Raster::Rgb([r, g, b]) => r.add(g).add(b).scaled(1.0 / 3.0),
        }
    }
}

fn format_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn from_bytes(rows: usize, cols: usize, bytes: &[u8], channel: usize, stride: usize) -> Image2D {
    Image2D::from_raw(
        rows,
        cols,
        bytes.iter().skip(channel).step_by(stride).map(|&b| b as f64 / 255.0).collect(),
    )
}

/// Loads an 8-bit gray or RGB raster; an alpha channel is dropped.
pub fn load_image(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| io_error(path, e))?
        .with_guessed_format()
        .map_err(|e| io_error(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png | ImageFormat::Pnm) => {}
        Some(f) => return Err(format_error(path, format!("unsupported format {f:?}"))),
        None => return Err(format_error(path, "unrecognized format")),
    }
    let img = reader.decode().map_err(|e| format_error(path, e.to_string()))?;
    let (cols, rows) = (img.width() as usize, img.height() as usize);
    if rows == 0 || cols == 0 {
        return Err(format_error(path, "empty image"));
    }
    match img {
        DynamicImage::ImageLuma8(b) => Ok(Raster::Gray(from_bytes(rows, cols, b.as_raw(), 0, 1))),
        DynamicImage::ImageLumaA8(b) => Ok(Raster::Gray(from_bytes(rows, cols, b.as_raw(), 0, 2))),
        DynamicImage::ImageRgb8(b) => {
            let raw = b.as_raw();
            Ok(Raster::Rgb([0, 1, 2].map(|c| from_bytes(rows, cols, raw, c, 3))))
        }
        DynamicImage::ImageRgba8(b) => {
            let raw = b.as_raw();
            Ok(Raster::Rgb([0, 1, 2].map(|c| from_bytes(rows, cols, raw, c, 4))))
        }
        other => Err(format_error(
            path,
            format!("only 8-bit gray or RGB rasters are supported, got {:?}", other.color()),
        )),
    }
}

/// Clips to `[0, 1]` and quantizes with round-half-up.
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Saves a raster as PNG, PGM or PPM according to the file extension.
pub fn save_image(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (rows, cols) = raster.shape();
    for c in raster.channels() {
        if !c.is_finite() {
            return Err(Error::InvalidImage("cannot save non-finite values".into()));
        }
    }
    let (bytes, color) = match raster {
        Raster::Gray(g) => (g.as_slice().iter().map(|&v| quantize(v)).collect::<Vec<u8>>(), ExtendedColorType::L8),
        Raster::Rgb(ch) => {
            let mut out = Vec::with_capacity(rows * cols * 3);
            for k in 0..rows * cols {
                for c in ch {
                    out.push(quantize(c.as_slice()[k]));
                }
            }
            (out, ExtendedColorType::Rgb8)
        }
    };
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let (w, h) = (
        u32::try_from(cols).map_err(|_| format_error(path, "width overflows u32"))?,
        u32::try_from(rows).map_err(|_| format_error(path, "height overflows u32"))?,
    );
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    let writer = std::io::BufWriter::new(file);
    let result = match (ext.as_str(), raster) {
        ("png", _) => image::codecs::png::PngEncoder::new(writer).write_image(&bytes, w, h, color),
        ("pgm", Raster::Gray(_)) | ("pnm", Raster::Gray(_)) => {
            PnmEncoder::new(writer)
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
                .write_image(&bytes, w, h, color)
        }
        ("ppm", Raster::Rgb(_)) | ("pnm", Raster::Rgb(_)) => {
            PnmEncoder::new(writer)
                .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                .write_image(&bytes, w, h, color)
        }
        ("pgm", Raster::Rgb(_)) => return Err(format_error(path, "PGM cannot hold an RGB raster")),
        ("ppm", Raster::Gray(_)) => return Err(format_error(path, "PPM expects an RGB raster")),
        _ => return Err(format_error(path, format!("unsupported extension `{ext}`"))),
    };
    result.map_err(|e| format_error(path, e.to_string()))
}

/// Serializes an edge map. Fails if a value does not fit in `f32`.
pub fn encode_edge_map(map: &Image2D) -> Result<Vec<u8>> {
    let (rows, cols) = map.shape();
    let r = u32::try_from(rows).map_err(|_| Error::InvalidImage(format!("{rows} rows overflow u32")))?;
    let c = u32::try_from(cols).map_err(|_| Error::InvalidImage(format!("{cols} cols overflow u32")))?;
    let mut out = Vec::with_capacity(EDGE_MAP_HEADER_LEN + 4 * map.len());
    out.extend_from_slice(EDGE_MAP_MAGIC);
    out.push(EDGE_MAP_VERSION);
    out.extend_from_slice(&r.to_le_bytes());
    out.extend_from_slice(&c.to_le_bytes());
    for (k, &v) in map.as_slice().iter().enumerate() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::InvalidImage(format!("edge value {v} at index {k} is not representable as f32")));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

/// Parses an EGMP byte buffer. `origin` is only used in error messages.
pub fn decode_edge_map(bytes: &[u8], origin: &Path) -> Result<Image2D> {
    if bytes.len() < EDGE_MAP_HEADER_LEN {
        return Err(format_error(origin, format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != EDGE_MAP_MAGIC {
        return Err(format_error(origin, format!("bad magic {:?}", String::from_utf8_lossy(&bytes[0..4]))));
    }
    if bytes[4] != EDGE_MAP_VERSION {
        return Err(format_error(origin, format!("unsupported version {}", bytes[4])));
    }
    let rows = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
    if rows == 0 || cols == 0 {
        return Err(format_error(origin, format!("empty dimensions {rows}x{cols}")));
    }
    let payload = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| format_error(origin, format!("dimensions {rows}x{cols} overflow")))?;
    let body = &bytes[EDGE_MAP_HEADER_LEN..];
    if body.len() != payload {
        return Err(format_error(
            origin,
            format!("payload is {} bytes, expected {payload} for {rows}x{cols}", body.len()),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (k, chunk) in body.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(format_error(origin, format!("non-finite value at index {k}")));
        }
        data.push(v as f64);
    }
    Ok(Image2D::from_raw(rows, cols, data))
}

pub fn save_edge_map(map: &Image2D, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_edge_map(map)?;
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn load_edge_map(path: impl AsRef<Path>) -> Result<Image2D> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    decode_edge_map(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_map_layout() {
        let m = Image2D::from_rows(&[[0.5, -0.25], [1.0, 0.0]]);
        let bytes = encode_edge_map(&m).unwrap();
        assert_eq!(bytes.len(), 13 + 16);
        assert_eq!(&bytes[..5], b"EGMP\x01");
        assert_eq!(&bytes[5..13], &[2, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&bytes[13..17], &0.5f32.to_le_bytes());
        assert_eq!(decode_edge_map(&bytes, Path::new("mem")).unwrap(), m);
    }

    #[test]
    fn malformed_maps() {
        let m = Image2D::from_rows(&[[0.5, -0.25], [1.0, 0.0]]);
        let good = encode_edge_map(&m).unwrap();
        let p = Path::new("mem");
        let mut bad = good.clone();
        bad[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_edge_map(&bad, p), Err(Error::Format { .. })));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(decode_edge_map(&bad, p).is_err());
        assert!(decode_edge_map(&good[..20], p).is_err());
        assert!(decode_edge_map(&good[..8], p).is_err());
        let mut bad = good.clone();
        bad[13..17].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(decode_edge_map(&bad, p).is_err());
        let mut bad = good.clone();
        bad[5..9].copy_from_slice(&u32::MAX.to_le_bytes());
        bad[9..13].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_edge_map(&bad, p).is_err());
        assert!(encode_edge_map(&Image2D::from_rows(&[[1e300]])).is_err());
    }

    #[test]
    fn quantization_rounds_half_up_and_clips() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(-0.3), 0);
        assert_eq!(quantize(7.0), 255);
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(0.25), 64);
    }
}
